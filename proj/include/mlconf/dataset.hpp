#pragma once

// Multilingual dataset construction: dual translation, agreement filtering
// into a parallel corpus, review-sheet export, and JSONL dataset I/O.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mlconf/backend.hpp"
#include "mlconf/prompts.hpp"
#include "mlconf/types.hpp"

namespace mlconf::dataset {

inline constexpr std::size_t kDefaultTopN = 2000;
inline constexpr std::size_t kDefaultReviewSample = 50;

struct Translation {
    std::string question;
    std::string answer;

    friend bool operator==(const Translation&, const Translation&) = default;
};

struct TranslationPair {
    std::string item_id;
    QAItem source;
    Language target = Language::Fr;
    Translation a;
    Translation b;
    double agreement = 0.0;

    friend bool operator==(const TranslationPair&, const TranslationPair&) = default;
};

void to_json(json& j, const TranslationPair& p);
void from_json(const json& j, TranslationPair& p);

struct Translator {
    const backend::Backend& backend;
    const prompts::PromptLibrary& prompts;
    double temperature = 0.0;
    int max_tokens = 256;
};

// Mean of the question F1 and the answer F1 between the two translations,
// tokenized per the target language.
double agreement(const Translation& a, const Translation& b, Language target);

TranslationPair translate_item(const Translator& a, const Translator& b, const QAItem& source, Language target);

// Highest agreement first (ties by item_id ascending), keeping min(top_n, n).
std::vector<TranslationPair> similarity_filter(std::vector<TranslationPair> pairs, std::size_t top_n);

struct ParallelCorpus {
    std::vector<std::string> item_ids;  // present in every target language, sorted
    std::map<Language, std::vector<TranslationPair>> retained;  // per-language filter output
    std::map<Language, std::vector<TranslationPair>> parallel;  // restricted to item_ids
};

// Filters each language separately, then intersects the retained ids so every
// kept item exists in all languages.
ParallelCorpus build_parallel_corpus(const std::map<Language, std::vector<TranslationPair>>& pairs,
                                     std::size_t top_n);

// Dataset item in the target language: translator A's question, with the
// answers of both translators as gold aliases.
QAItem to_item(const TranslationPair& pair);

// Seeded uniform sample rendered as CSV with an empty verdict column.
std::string review_sheet_csv(const std::vector<TranslationPair>& pairs, std::size_t sample_size,
                             std::uint64_t seed);
void export_review_sheet(const std::vector<TranslationPair>& pairs, std::size_t sample_size, std::uint64_t seed,
                         const std::filesystem::path& path);

struct ReviewVerdict {
    std::string item_id;
    Language target = Language::Fr;
    std::string verdict;
};
// Reads a review sheet back, returning the rows whose verdict is filled in.
std::vector<ReviewVerdict> read_review_sheet(const std::filesystem::path& path);

std::vector<QAItem> parse_dataset(std::string_view contents);
std::string serialize_dataset(const std::vector<QAItem>& items);
std::vector<QAItem> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::vector<QAItem>& items, const std::filesystem::path& path);

struct BuildOptions {
    std::vector<Language> targets;
    std::size_t top_n = kDefaultTopN;
    std::size_t review_sample = kDefaultReviewSample;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
};

struct BuildResult {
    std::map<Language, std::vector<QAItem>> items;  // includes the English source subset
    ParallelCorpus corpus;
    std::vector<std::string> skipped;  // "<item_id>/<lang>: <error>"
    std::string review_sheet;
};

// Runs translation for every (item, target), skipping and recording
// failures, then filters and samples the review sheet.
BuildResult build_dataset(const Translator& a, const Translator& b, const std::vector<QAItem>& source,
                          const BuildOptions& options);

}  // namespace mlconf::dataset
