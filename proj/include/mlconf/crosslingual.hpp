#pragma once

// Cross-lingual aggregation of monolingual confidence scores, plus the two
// single-language multi-output baselines it is compared against.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mlconf/confidence.hpp"
#include "mlconf/types.hpp"

namespace mlconf::crosslingual {

inline constexpr int kDefaultSampleCount = 5;
inline constexpr int kDefaultParaphraseCount = 5;

// Mean of the per-language scores over grouping.languages. The result is
// attached to the pivot language. Languages in `records` outside the
// grouping are ignored.
ConfidenceRecord cross_lingual_confidence(const std::map<Language, ConfidenceRecord>& records,
                                          const ValidatedGrouping& grouping);

// The nine groupings of the reference experiments plus the English-only
// baseline, named en, shared2, shared3, shared5, distinct2, distinct4,
// distinct6, mixed3, mixed5, all.
std::vector<LanguageGrouping> standard_groupings();
const LanguageGrouping& find_grouping(const std::vector<LanguageGrouping>& groupings,
                                      std::string_view name);

struct SamplingOptions {
    int samples = kDefaultSampleCount;
    double temperature = backend::kDefaultTemperature;
    int max_tokens = backend::kDefaultMaxTokens;
};

// Mean of base_method over `samples` answers drawn with sample_index 0..m-1.
ConfidenceRecord temperature_sampling_confidence(const confidence::Elicitation& ctx, const QAItem& item,
                                                 Method base_method, const SamplingOptions& options = {});

// Mean of base_method over answers generated for each paraphrased question.
// Each paraphrase uses the generation settings of `options` with sample 0.
ConfidenceRecord prompt_perturbation_confidence(const confidence::Elicitation& ctx, const QAItem& item,
                                                const std::vector<std::string>& paraphrases,
                                                Method base_method, const SamplingOptions& options = {});

// Asks the backend for `count` same-language rewrites of the question.
// Returns up to `count` distinct non-empty lines.
std::vector<std::string> generate_paraphrases(const confidence::Elicitation& ctx, const QAItem& item,
                                              int count = kDefaultParaphraseCount);

// Synthetic per-language scores: 0.7 + e for a correct item, 0.3 + e for an
// incorrect one, e ~ U(-noise, noise) independent per (language, item).
// Language l draws from stream index l of `seed`.
struct NoiseModel {
    double correct_center = 0.7;
    double incorrect_center = 0.3;
    double noise = 0.25;
    std::uint64_t seed = 0;
};
std::map<Language, std::vector<ConfidenceRecord>> noisy_scores(const std::vector<int>& labels,
                                                               const std::vector<Language>& languages,
                                                               const NoiseModel& model);

}  // namespace mlconf::crosslingual
