#pragma once

// Monolingual confidence estimators: three scores computed from token
// probabilities and three elicited from the model itself.

#include <array>
#include <optional>
#include <set>
#include <string>

#include "mlconf/backend.hpp"
#include "mlconf/prompts.hpp"
#include "mlconf/types.hpp"

namespace mlconf::confidence {

inline constexpr int kElicitationAttempts = 3;
inline constexpr double kParseFallbackScore = 0.5;
inline constexpr const char* kParseFallbackFlag = "parse_fallback";

struct VerbalWordScale {
    std::array<std::string, 5> words;  // lowest → highest
    std::array<double, 5> scores{0.0, 0.25, 0.5, 0.75, 1.0};

    static VerbalWordScale for_language(Language lang);
    // Throws InvalidArgument unless scores are strictly increasing in [0,1]
    // and words are distinct and non-empty.
    void validate() const;
    std::string joined(std::string_view separator = ", ") const;
};

// Geometric mean of token probabilities, computed in log space.
double likelihood_norm(const Generation& gen);
// Arithmetic mean over the output tokens.
double likelihood_avg(const Generation& gen);
double likelihood_min(const Generation& gen);

// Everything an elicitation call needs besides the item.
struct Elicitation {
    const backend::Backend& backend;
    const prompts::PromptLibrary& prompts;
    double temperature = 0.0;
    int max_tokens = 16;
    int top_alternatives = 5;
};

struct Score {
    double value = 0.0;
    std::set<std::string> flags;
};

// First decimal or percentage in the reply, scaled to [0,1].
std::optional<double> parse_verbal_number(std::string_view reply);
// Leftmost match (longest on ties) of any scale word, or of the English
// words as a fallback, case-insensitively.
std::optional<double> match_verbal_word(std::string_view reply, const VerbalWordScale& scale);

// Probability of the True choice at the decision position of a
// self-evaluation reply; normalized over {True, False} when both appear.
double true_probability_from(const Generation& reply, Language lang);

Score true_probability(const Elicitation& ctx, const QAItem& item, const std::string& answer);
Score verbal_number(const Elicitation& ctx, const QAItem& item, const std::string& answer);
Score verbal_word(const Elicitation& ctx, const QAItem& item, const std::string& answer,
                  const VerbalWordScale& scale);

// Answer-generation request for an item (few-shot template, token probs on).
backend::GenerationRequest answer_request(const prompts::PromptLibrary& prompts, const QAItem& item,
                                          double temperature = backend::kDefaultTemperature,
                                          int max_tokens = backend::kDefaultMaxTokens);

// Dispatch for monolingual methods. Likelihood methods read gen's tokens;
// elicited methods score answer_text(gen).
ConfidenceRecord estimate(Method method, const Elicitation& ctx, const QAItem& item,
                          const Generation& gen);

}  // namespace mlconf::confidence
