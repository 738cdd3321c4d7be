#pragma once

// Confidence-gated self-refinement: answers whose confidence is at or below
// a threshold k get one revision pass with the score shown as feedback.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mlconf/confidence.hpp"
#include "mlconf/types.hpp"

namespace mlconf::refine {

enum class PolicyKind { FixedValue, RandomSampling };

struct FeedbackPolicy {
    PolicyKind kind = PolicyKind::FixedValue;
    std::optional<double> k;              // FixedValue only
    std::optional<std::uint64_t> seed;    // RandomSampling only

    static FeedbackPolicy fixed(double k);
    static FeedbackPolicy random(std::uint64_t seed);
    // "fixed:<k>" or "random:<seed>"
    static FeedbackPolicy parse(std::string_view spec);
    std::string to_string() const;
    void validate() const;
};

struct Decision {
    bool refine = false;
    double threshold = 0.0;
};

// Refine iff conf <= k. For RandomSampling, k ~ U(0,1) is drawn from a
// generator seeded by (seed, item_index).
Decision decide_refine(double conf, const FeedbackPolicy& policy, std::size_t item_index);

inline constexpr const char* kEmptyRevisionFlag = "empty_revision";
inline constexpr const char* kRefineErrorFlag = "refine_error";

struct Revision {
    std::string text;
    Generation generation;
    std::set<std::string> flags;
};

// Confidence rendered with two decimals, as shown to the model.
std::string format_confidence(double conf);

backend::GenerationRequest refinement_request(const prompts::PromptLibrary& prompts, const QAItem& item,
                                              const std::string& initial, double conf,
                                              double temperature = backend::kDefaultTemperature,
                                              bool want_token_probs = false);

// One revision pass. An empty reply keeps the initial answer and is flagged.
Revision refine_answer(const confidence::Elicitation& ctx, const QAItem& item, const std::string& initial,
                       double conf, double temperature = backend::kDefaultTemperature,
                       bool want_token_probs = false);

struct RefinementInput {
    QAItem item;
    std::string initial_answer;
    double initial_conf = 0.0;
    // Index for the random-policy draw; defaults to the position in the input.
    std::optional<std::size_t> item_index;
};

struct RefinementOutcome {
    std::string item_id;
    Language language = Language::En;
    bool refined = false;
    double threshold_used = 0.0;
    std::string initial_answer;
    std::string final_answer;
    double initial_conf = 0.0;
    std::optional<double> final_conf;
    std::set<std::string> flags;
    std::optional<std::string> error;

    friend bool operator==(const RefinementOutcome&, const RefinementOutcome&) = default;
};

void to_json(json& j, const RefinementOutcome& o);
void from_json(const json& j, RefinementOutcome& o);

struct RefineOptions {
    double temperature = backend::kDefaultTemperature;
    // When set, the final answer is re-scored with this method.
    std::optional<Method> rescore;
    std::size_t workers = 1;
};

// Applies decide_refine and refine_answer per item. Item failures are
// recorded on the outcome and the run continues. Output order follows input.
std::vector<RefinementOutcome> run_refinement(const confidence::Elicitation& ctx,
                                              const std::vector<RefinementInput>& inputs,
                                              const FeedbackPolicy& policy, const RefineOptions& options = {});

}  // namespace mlconf::refine
