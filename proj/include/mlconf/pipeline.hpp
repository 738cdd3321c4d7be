#pragma once

// Stage orchestration over JSONL artifacts in a work directory:
// build-dataset, generate, score, aggregate, refine, evaluate, report.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mlconf/backend.hpp"
#include "mlconf/prompts.hpp"
#include "mlconf/refine.hpp"
#include "mlconf/report.hpp"
#include "mlconf/types.hpp"

namespace mlconf::pipeline {

// Backend roles a config may define. Missing roles fall back to "answer".
inline constexpr std::array<std::string_view, 4> kRoles = {"answer", "judge", "translator_a", "translator_b"};

struct BaselineConfig {
    bool enabled = false;
    Method base_method = Method::VerbalNumber;
    int samples = 5;
    int paraphrases = 5;
};

struct Config {
    std::map<std::string, backend::BackendDescriptor> backends;
    std::vector<Language> languages;
    std::vector<LanguageGrouping> groupings;
    std::vector<Method> methods;
    Method aggregate_method = Method::VerbalNumber;
    Method refine_method = Method::VerbalNumber;
    std::optional<Method> rescore;
    BaselineConfig baselines;
    refine::FeedbackPolicy policy = refine::FeedbackPolicy::random(0);

    std::filesystem::path work_dir;
    std::filesystem::path dataset_dir;  // defaults to work_dir/dataset
    std::optional<std::filesystem::path> source;  // English source items
    std::optional<std::filesystem::path> cache_dir;
    std::optional<std::filesystem::path> templates_dir;
    std::optional<std::filesystem::path> audit_path;

    std::uint64_t seed = 0;
    std::size_t concurrency = 4;
    double temperature = backend::kDefaultTemperature;
    int max_tokens = backend::kDefaultMaxTokens;
    int elicit_max_tokens = 16;
    int top_alternatives = 5;
    std::size_t top_n = 2000;
    std::size_t review_sample = 50;
};

// Relative paths resolve against base_dir.
Config parse_config(const json& j, const std::filesystem::path& base_dir);
Config load_config(const std::filesystem::path& path);

struct AnswerRecord {
    std::string item_id;
    Language language = Language::En;
    std::string answer;
    Generation generation;
};
void to_json(json& j, const AnswerRecord& r);
void from_json(const json& j, AnswerRecord& r);

struct StageResult {
    explicit StageResult(std::string name = {}) : stage(std::move(name)) {}

    std::string stage;
    std::size_t records = 0;
    std::vector<std::string> failures;  // "<item>/<lang>: <code>: <message>"
    std::vector<std::string> warnings;

    json summary() const;
};

template <typename T>
std::vector<T> read_jsonl(const std::filesystem::path& path);
template <typename T>
void write_jsonl(const std::vector<T>& rows, const std::filesystem::path& path);

class Pipeline {
public:
    explicit Pipeline(Config config);
    ~Pipeline();

    StageResult build_dataset();
    StageResult generate(const std::vector<Language>& languages);
    StageResult score(const std::vector<Method>& methods, const std::vector<Language>& languages);
    StageResult aggregate(const std::vector<std::string>& groupings);
    StageResult refine(const std::vector<Language>& languages);
    StageResult evaluate(const std::vector<Language>& languages);
    // Writes report.json, report.txt and auroc.csv into the work dir.
    report::Report report();
    // Every stage in order; build-dataset only when a source is configured.
    std::vector<StageResult> run_all();

    std::size_t purge_cache(const std::optional<std::string>& model_id);

    const Config& config() const noexcept { return config_; }
    const prompts::PromptLibrary& prompts() const noexcept { return prompts_; }
    const backend::Backend& backend(std::string_view role);

    std::filesystem::path dataset_path(Language lang) const;
    std::filesystem::path answers_path(Language lang) const;
    std::filesystem::path scores_path(std::string_view key, Language lang) const;
    std::filesystem::path cross_path(std::string_view grouping) const;
    std::filesystem::path refined_path(Language lang) const;
    std::filesystem::path evals_path(Language lang, bool refined) const;

private:
    std::vector<QAItem> dataset(Language lang) const;

    Config config_;
    prompts::PromptLibrary prompts_;
    std::map<std::string, std::unique_ptr<backend::Backend>, std::less<>> backends_;
};

}  // namespace mlconf::pipeline
