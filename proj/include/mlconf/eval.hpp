#pragma once

// Answer-quality metrics (exact match, uni-gram F1, NLI judgement) and the
// AUROC of confidence scores against correctness labels.

#include <span>
#include <string>
#include <vector>

#include "mlconf/backend.hpp"
#include "mlconf/prompts.hpp"
#include "mlconf/types.hpp"

namespace mlconf::eval {

inline constexpr int kJudgeAttempts = 3;
inline constexpr const char* kJudgeFallbackFlag = "judge_fallback";

// Lowercase, punctuation to spaces, collapse whitespace, trim; English
// additionally drops the articles a/an/the.
std::string normalize(std::string_view text, Language lang);

// Whitespace tokens, or one token per character for zh/ja/th.
std::vector<std::string> tokenize(std::string_view text, Language lang);

int exact_match(std::string_view pred, const std::vector<std::string>& golds, Language lang);

// Max over aliases of the multiset-overlap F1 on normalized tokens.
double unigram_f1(std::string_view pred, const std::vector<std::string>& golds, Language lang);

enum class Verdict { Entailment, Neutral, Contradiction };

std::optional<Verdict> parse_verdict(std::string_view reply);

struct Judgement {
    int correct = 0;
    std::optional<Verdict> verdict;
    std::set<std::string> flags;
};

struct Judge {
    const backend::Backend& backend;
    const prompts::PromptLibrary& prompts;
    double temperature = 0.0;
    int max_tokens = 8;
};

// 1 iff the judge answers Entailment; unparseable after three attempts
// yields 0 with the judge_fallback flag.
Judgement nli_accuracy(const Judge& judge, const QAItem& item, const std::string& pred);

struct ScoredLabel {
    double score = 0.0;
    int label = 0;
};

// Mann-Whitney estimate via average ranks: P(score_pos > score_neg) with
// ties counted one half. Throws DegenerateLabels without both classes.
double auroc(std::span<const ScoredLabel> records);

// Full per-answer evaluation (EM, F1, NLI) of one generated answer.
EvalRecord evaluate_answer(const Judge& judge, const QAItem& item, const std::string& pred,
                           std::size_t token_length);

}  // namespace mlconf::eval
