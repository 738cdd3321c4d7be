#include "mlconf/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <functional>

#include "mlconf/confidence.hpp"
#include "mlconf/crosslingual.hpp"
#include "mlconf/dataset.hpp"
#include "mlconf/error.hpp"
#include "mlconf/eval.hpp"
#include "mlconf/text.hpp"
#include "mlconf/util.hpp"

namespace mlconf::pipeline {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

backend::BackendDescriptor parse_backend(const json& j, const fs::path& base) {
    const auto kind = get_or<std::string>(j, "kind", "mock");
    const auto model = get_or<std::string>(j, "model_id", "");
    if (kind == "mock") {
        backend::MockScript script;
        if (j.contains("script")) {
            const auto& s = j.at("script");
            script = s.is_string() ? backend::MockScript::load(resolve(base, s.get<std::string>()))
                                   : backend::MockScript::from_json(s);
        }
        return backend::mock_backend(std::move(script), model.empty() ? "mock" : model);
    }
    if (kind == "http") {
        return backend::http_backend(model, get_or<std::string>(j, "endpoint", ""),
                                     get_or<std::string>(j, "auth_env", "OPENAI_API_KEY"));
    }
    throw ConfigError("backend kind must be 'mock' or 'http', got '" + kind + "'");
}

Method parse_method_field(const json& j, const char* key, Method fallback) {
    if (!j.contains(key)) return fallback;
    return parse_method(j.at(key).get<std::string>());
}

std::string failure(const std::string& item_id, Language lang, const Error& e) {
    return item_id + "/" + std::string(to_code(lang)) + ": " + e.code() + ": " + e.what();
}

// Runs `job` per index under the worker limit, collecting per-item errors.
template <typename R>
std::vector<std::optional<R>> run_items(std::size_t n, std::size_t workers,
                                       const std::function<R(std::size_t)>& job,
                                       const std::function<std::string(std::size_t)>& describe,
                                       StageResult& result) {
    std::vector<std::string> errors(n);
    const std::function<std::optional<R>(std::size_t)> wrapped = [&](std::size_t i) -> std::optional<R> {
        try {
            return job(i);
        } catch (const Error& e) {
            errors[i] = describe(i) + ": " + e.code() + ": " + e.what();
        } catch (const json::exception& e) {
            errors[i] = describe(i) + ": json: " + e.what();
        }
        return std::nullopt;
    };
    auto out = parallel_map<std::optional<R>>(n, workers, wrapped);
    for (std::size_t i = 0; i < n; ++i) {
        if (out[i]) {
            ++result.records;
        } else {
            spdlog::warn("{}: {}", result.stage, errors[i]);
            result.failures.push_back(errors[i]);
        }
    }
    return out;
}

template <typename T>
std::vector<T> compact(std::vector<std::optional<T>> xs) {
    std::vector<T> out;
    for (auto& x : xs) {
        if (x) out.push_back(std::move(*x));
    }
    return out;
}

std::map<std::string, ConfidenceRecord> by_item(const std::vector<ConfidenceRecord>& records) {
    std::map<std::string, ConfidenceRecord> out;
    for (const auto& r : records) out.emplace(r.item_id, r);
    return out;
}

struct ParaphraseRecord {
    std::string item_id;
    std::vector<std::string> paraphrases;
};

void to_json(json& j, const ParaphraseRecord& r) { j = json{{"item_id", r.item_id}, {"paraphrases", r.paraphrases}}; }
void from_json(const json& j, ParaphraseRecord& r) {
    r.item_id = j.at("item_id").get<std::string>();
    r.paraphrases = j.at("paraphrases").get<std::vector<std::string>>();
}

}  // namespace

Config parse_config(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    Config c;
    try {
        if (j.contains("backends")) {
            for (const auto& [role, desc] : j.at("backends").items()) {
                if (std::find(kRoles.begin(), kRoles.end(), role) == kRoles.end()) {
                    throw ConfigError("unknown backend role '" + role + "'");
                }
                c.backends[role] = parse_backend(desc, base_dir);
            }
        }
        if (!c.backends.count("answer")) throw ConfigError("config must define backends.answer");

        for (const auto& code : get_or<std::vector<std::string>>(j, "languages", {"en"})) {
            c.languages.push_back(parse_language(code).code);
        }
        if (c.languages.empty()) throw ConfigError("languages must not be empty");

        const auto standard = crosslingual::standard_groupings();
        if (j.contains("groupings")) {
            for (const auto& g : j.at("groupings")) {
                if (g.is_string()) {
                    c.groupings.push_back(crosslingual::find_grouping(standard, g.get<std::string>()));
                } else {
                    auto grouping = g.get<LanguageGrouping>();
                    (void)validate_grouping(grouping);
                    c.groupings.push_back(std::move(grouping));
                }
            }
        }

        if (j.contains("methods")) {
            for (const auto& m : j.at("methods").get<std::vector<std::string>>()) {
                const Method method = parse_method(m);
                if (method == Method::CrossLingual) throw ConfigError("cross-lingual is produced by aggregate");
                c.methods.push_back(method);
            }
        } else {
            c.methods.assign(kMonolingualMethods.begin(), kMonolingualMethods.end());
        }
        c.aggregate_method = parse_method_field(j, "aggregate_method", c.aggregate_method);
        c.refine_method = parse_method_field(j, "refine_method", c.refine_method);
        if (j.contains("rescore") && !j.at("rescore").is_null()) c.rescore = parse_method(j.at("rescore").get<std::string>());

        if (j.contains("baselines")) {
            const auto& b = j.at("baselines");
            c.baselines.enabled = get_or<bool>(b, "enabled", true);
            c.baselines.base_method = parse_method_field(b, "base_method", c.baselines.base_method);
            c.baselines.samples = get_or<int>(b, "samples", c.baselines.samples);
            c.baselines.paraphrases = get_or<int>(b, "paraphrases", c.baselines.paraphrases);
        }

        c.seed = get_or<std::uint64_t>(j, "seed", 0);
        c.policy = refine::FeedbackPolicy::parse(get_or<std::string>(j, "policy", "random:" + std::to_string(c.seed)));
        c.concurrency = get_or<std::size_t>(j, "concurrency", c.concurrency);
        if (c.concurrency < 1) throw ConfigError("concurrency must be at least 1");

        const json gen = get_or<json>(j, "generation", json::object());
        c.temperature = get_or<double>(gen, "temperature", c.temperature);
        c.max_tokens = get_or<int>(gen, "max_tokens", c.max_tokens);
        c.elicit_max_tokens = get_or<int>(gen, "elicit_max_tokens", c.elicit_max_tokens);
        c.top_alternatives = get_or<int>(gen, "top_alternatives", c.top_alternatives);

        const json ds = get_or<json>(j, "dataset", json::object());
        c.top_n = get_or<std::size_t>(ds, "top_n", c.top_n);
        c.review_sample = get_or<std::size_t>(ds, "review_sample", c.review_sample);

        const json paths = get_or<json>(j, "paths", json::object());
        c.work_dir = resolve(base_dir, get_or<std::string>(paths, "work_dir", "work"));
        c.dataset_dir = paths.contains("dataset_dir") ? resolve(base_dir, paths.at("dataset_dir").get<std::string>())
                                                       : c.work_dir / "dataset";
        if (paths.contains("source")) c.source = resolve(base_dir, paths.at("source").get<std::string>());
        if (paths.contains("cache_dir")) c.cache_dir = resolve(base_dir, paths.at("cache_dir").get<std::string>());
        if (paths.contains("templates_dir")) {
            c.templates_dir = resolve(base_dir, paths.at("templates_dir").get<std::string>());
        }
        if (paths.contains("audit")) c.audit_path = resolve(base_dir, paths.at("audit").get<std::string>());
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.code() + ": " + e.what());
    }
    return c;
}

Config load_config(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(j, fs::absolute(path).parent_path());
}

void to_json(json& j, const AnswerRecord& r) {
    j = json{{"item_id", r.item_id},
             {"language", std::string(to_code(r.language))},
             {"answer", r.answer},
             {"generation", r.generation}};
}

void from_json(const json& j, AnswerRecord& r) {
    r.item_id = j.at("item_id").get<std::string>();
    r.language = parse_language(j.at("language").get<std::string>()).code;
    r.answer = j.at("answer").get<std::string>();
    r.generation = j.at("generation").get<Generation>();
}


json StageResult::summary() const {
    return json{{"stage", stage}, {"records", records}, {"failures", failures.size()}, {"warnings", warnings.size()}};
}

template <typename T>
std::vector<T> read_jsonl(const fs::path& path) {
    if (!fs::exists(path)) throw IoError("missing artifact " + path.string());
    std::vector<T> rows;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(read_file(path))) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            rows.push_back(json::parse(line).get<T>());
        } catch (const json::exception& e) {
            throw MalformedLine(line_no, path.string() + ": " + e.what());
        }
    }
    return rows;
}

template <typename T>
void write_jsonl(const std::vector<T>& rows, const fs::path& path) {
    std::string out;
    for (const auto& r : rows) {
        out += dump_line(json(r));
        out += "\n";
    }
    write_file_atomic(path, out);
}

template std::vector<QAItem> read_jsonl<QAItem>(const fs::path&);
template std::vector<ConfidenceRecord> read_jsonl<ConfidenceRecord>(const fs::path&);
template std::vector<EvalRecord> read_jsonl<EvalRecord>(const fs::path&);
template std::vector<AnswerRecord> read_jsonl<AnswerRecord>(const fs::path&);
template std::vector<refine::RefinementOutcome> read_jsonl<refine::RefinementOutcome>(const fs::path&);
template void write_jsonl<QAItem>(const std::vector<QAItem>&, const fs::path&);
template void write_jsonl<ConfidenceRecord>(const std::vector<ConfidenceRecord>&, const fs::path&);
template void write_jsonl<EvalRecord>(const std::vector<EvalRecord>&, const fs::path&);
template void write_jsonl<AnswerRecord>(const std::vector<AnswerRecord>&, const fs::path&);
template void write_jsonl<refine::RefinementOutcome>(const std::vector<refine::RefinementOutcome>&, const fs::path&);

Pipeline::Pipeline(Config config) : config_(std::move(config)), prompts_(prompts::PromptLibrary::defaults()) {
    if (config_.templates_dir) prompts_.load_overrides(*config_.templates_dir);
}

Pipeline::~Pipeline() = default;

const backend::Backend& Pipeline::backend(std::string_view role) {
    if (auto it = backends_.find(role); it != backends_.end()) return *it->second;
    std::string source(role);
    if (!config_.backends.count(source)) {
        source = (role == "translator_b" && config_.backends.count("translator_a")) ? "translator_a" : "answer";
    }
    backend::BackendOptions options;
    options.cache_dir = config_.cache_dir;
    options.audit_path = config_.audit_path;
    options.max_in_flight = config_.concurrency;
    auto b = std::make_unique<backend::Backend>(config_.backends.at(source), options);
    auto& ref = *b;
    backends_.emplace(std::string(role), std::move(b));
    return ref;
}

fs::path Pipeline::dataset_path(Language lang) const {
    return config_.dataset_dir / (std::string(to_code(lang)) + ".jsonl");
}
fs::path Pipeline::answers_path(Language lang) const {
    return config_.work_dir / "answers" / (std::string(to_code(lang)) + ".jsonl");
}
fs::path Pipeline::scores_path(std::string_view key, Language lang) const {
    return config_.work_dir / "scores" / (std::string(key) + "." + std::string(to_code(lang)) + ".jsonl");
}
fs::path Pipeline::cross_path(std::string_view grouping) const {
    return config_.work_dir / "scores" / ("cross-lingual." + std::string(grouping) + ".jsonl");
}
fs::path Pipeline::refined_path(Language lang) const {
    return config_.work_dir / "refined" / (std::string(to_code(lang)) + ".jsonl");
}
fs::path Pipeline::evals_path(Language lang, bool refined) const {
    return config_.work_dir / (refined ? "evals_refined" : "evals") / (std::string(to_code(lang)) + ".jsonl");
}

std::vector<QAItem> Pipeline::dataset(Language lang) const {
    auto items = dataset::load_dataset(dataset_path(lang));
    for (const auto& item : items) {
        if (item.language != lang) {
            throw InvalidArgument(dataset_path(lang).string() + " holds an item in language " +
                                  std::string(to_code(item.language)));
        }
    }
    return items;
}

StageResult Pipeline::build_dataset() {
    StageResult result{"build-dataset"};
    if (!config_.source) throw ConfigError("build-dataset needs paths.source");
    const auto source = dataset::load_dataset(*config_.source);
    dataset::Translator a{backend("translator_a"), prompts_};
    dataset::Translator b{backend("translator_b"), prompts_};
    dataset::BuildOptions options;
    for (Language l : config_.languages) {
        if (l != Language::En) options.targets.push_back(l);
    }
    options.top_n = config_.top_n;
    options.review_sample = config_.review_sample;
    options.seed = config_.seed;
    options.workers = config_.concurrency;
    auto built = dataset::build_dataset(a, b, source, options);
    for (const auto& [lang, items] : built.items) {
        if (std::find(config_.languages.begin(), config_.languages.end(), lang) == config_.languages.end()) continue;
        dataset::save_dataset(items, dataset_path(lang));
        result.records += items.size();
    }
    for (const auto& [lang, pairs] : built.corpus.retained) {
        std::string out;
        for (const auto& p : pairs) out += dump_line(json(p)) + "\n";
        write_file_atomic(config_.dataset_dir / ("pairs." + std::string(to_code(lang)) + ".jsonl"), out);
    }
    write_file_atomic(config_.dataset_dir / "review_sheet.csv", built.review_sheet);
    result.warnings = std::move(built.skipped);
    return result;
}

StageResult Pipeline::generate(const std::vector<Language>& languages) {
    StageResult result{"generate"};
    const auto& answer_backend = backend("answer");
    for (Language lang : languages) {
        const auto items = dataset(lang);
        const std::function<AnswerRecord(std::size_t)> job = [&](std::size_t i) {
            const auto req = confidence::answer_request(prompts_, items[i], config_.temperature, config_.max_tokens);
            auto gen = answer_backend.generate(req, 0).generation;
            return AnswerRecord{items[i].item_id, lang, answer_text(gen), std::move(gen)};
        };
        auto rows = run_items<AnswerRecord>(items.size(), config_.concurrency, job,
                                            [&](std::size_t i) { return items[i].item_id + "/" + std::string(to_code(lang)); },
                                            result);
        write_jsonl(compact(std::move(rows)), answers_path(lang));
    }
    return result;
}

StageResult Pipeline::score(const std::vector<Method>& methods, const std::vector<Language>& languages) {
    StageResult result{"score"};
    const confidence::Elicitation ctx{backend("answer"), prompts_, 0.0, config_.elicit_max_tokens,
                                      config_.top_alternatives};
    for (Language lang : languages) {
        const auto items = dataset(lang);
        std::map<std::string, AnswerRecord> answers;
        for (auto& a : read_jsonl<AnswerRecord>(answers_path(lang))) answers.emplace(a.item_id, std::move(a));

        std::vector<std::vector<std::string>> paraphrases;
        const bool needs_paraphrases =
            std::find(methods.begin(), methods.end(), Method::PromptPerturbation) != methods.end();
        if (needs_paraphrases) {
            const auto cache_path = config_.work_dir / "paraphrases" / (std::string(to_code(lang)) + ".jsonl");
            std::map<std::string, std::vector<std::string>> known;
            if (fs::exists(cache_path)) {
                for (auto& p : read_jsonl<ParaphraseRecord>(cache_path)) known[p.item_id] = std::move(p.paraphrases);
            }
            StageResult sub{"paraphrase"};
            const std::function<std::vector<std::string>(std::size_t)> job = [&](std::size_t i) {
                if (auto it = known.find(items[i].item_id); it != known.end()) return it->second;
                return crosslingual::generate_paraphrases(ctx, items[i], config_.baselines.paraphrases);
            };
            auto got = run_items<std::vector<std::string>>(
                items.size(), config_.concurrency, job,
                [&](std::size_t i) { return items[i].item_id + "/" + std::string(to_code(lang)); }, sub);
            std::vector<ParaphraseRecord> rows;
            for (std::size_t i = 0; i < items.size(); ++i) {
                paraphrases.push_back(got[i].value_or(std::vector<std::string>{}));
                if (got[i]) rows.push_back({items[i].item_id, *got[i]});
            }
            write_jsonl(rows, cache_path);
            result.failures.insert(result.failures.end(), sub.failures.begin(), sub.failures.end());
        }

        for (Method method : methods) {
            if (method == Method::CrossLingual) throw InvalidArgument("cross-lingual scores come from aggregate");
            crosslingual::SamplingOptions sampling{config_.baselines.samples, config_.temperature, config_.max_tokens};
            const std::function<ConfidenceRecord(std::size_t)> job = [&](std::size_t i) {
                const auto& item = items[i];
                switch (method) {
                    case Method::TemperatureSampling:
                        return crosslingual::temperature_sampling_confidence(ctx, item, config_.baselines.base_method,
                                                                             sampling);
                    case Method::PromptPerturbation:
                        if (paraphrases[i].empty()) throw PreconditionViolation("no paraphrases for item");
                        return crosslingual::prompt_perturbation_confidence(ctx, item, paraphrases[i],
                                                                            config_.baselines.base_method, sampling);
                    default: {
                        auto it = answers.find(item.item_id);
                        if (it == answers.end()) throw PreconditionViolation("no generated answer for item");
                        return confidence::estimate(method, ctx, item, it->second.generation);
                    }
                }
            };
            auto rows = run_items<ConfidenceRecord>(
                items.size(), config_.concurrency, job,
                [&](std::size_t i) {
                    return items[i].item_id + "/" + std::string(to_code(lang)) + "/" + std::string(to_string(method));
                },
                result);
            write_jsonl(compact(std::move(rows)), scores_path(to_string(method), lang));
        }
    }
    return result;
}

StageResult Pipeline::aggregate(const std::vector<std::string>& names) {
    StageResult result{"aggregate"};
    for (const auto& name : names) {
        const auto& grouping = crosslingual::find_grouping(config_.groupings, name);
        const auto validated = validate_grouping(grouping);
        std::map<Language, std::map<std::string, ConfidenceRecord>> per_lang;
        for (Language l : grouping.languages) {
            per_lang[l] = by_item(read_jsonl<ConfidenceRecord>(scores_path(to_string(config_.aggregate_method), l)));
        }
        const auto pivot_items = dataset(grouping.pivot);
        std::vector<ConfidenceRecord> out;
        for (const auto& item : pivot_items) {
            std::map<Language, ConfidenceRecord> records;
            for (const auto& [l, recs] : per_lang) {
                if (auto it = recs.find(item.item_id); it != recs.end()) records.emplace(l, it->second);
            }
            try {
                out.push_back(crosslingual::cross_lingual_confidence(records, validated));
                ++result.records;
            } catch (const Error& e) {
                result.failures.push_back(failure(item.item_id, grouping.pivot, e) + " [" + name + "]");
            }
        }
        write_jsonl(out, cross_path(name));
    }
    return result;
}

StageResult Pipeline::refine(const std::vector<Language>& languages) {
    StageResult result{"refine"};
    const confidence::Elicitation ctx{backend("answer"), prompts_, 0.0, config_.elicit_max_tokens,
                                      config_.top_alternatives};
    for (Language lang : languages) {
        const auto items = dataset(lang);
        std::map<std::string, AnswerRecord> answers;
        for (auto& a : read_jsonl<AnswerRecord>(answers_path(lang))) answers.emplace(a.item_id, std::move(a));
        const auto confs = by_item(read_jsonl<ConfidenceRecord>(scores_path(to_string(config_.refine_method), lang)));

        // Item positions stay those of the dataset so random-policy draws
        // do not shift when an upstream item is missing.
        std::vector<refine::RefinementInput> inputs;
        for (std::size_t i = 0; i < items.size(); ++i) {
            auto a = answers.find(items[i].item_id);
            auto c = confs.find(items[i].item_id);
            if (a == answers.end() || c == confs.end()) {
                result.failures.push_back(items[i].item_id + "/" + std::string(to_code(lang)) +
                                          ": PreconditionViolation: missing answer or confidence");
                continue;
            }
            inputs.push_back({items[i], a->second.answer, c->second.score, i});
        }
        const refine::RefineOptions options{config_.temperature, config_.rescore, config_.concurrency};
        const auto outcomes = refine::run_refinement(ctx, inputs, config_.policy, options);
        for (const auto& o : outcomes) {
            if (o.error) result.failures.push_back(o.item_id + "/" + std::string(to_code(lang)) + ": " + *o.error);
            else ++result.records;
        }
        write_jsonl(outcomes, refined_path(lang));
    }
    return result;
}

StageResult Pipeline::evaluate(const std::vector<Language>& languages) {
    StageResult result{"evaluate"};
    const eval::Judge judge{backend("judge"), prompts_};
    for (Language lang : languages) {
        const auto items = dataset(lang);
        std::map<std::string, AnswerRecord> answers;
        for (auto& a : read_jsonl<AnswerRecord>(answers_path(lang))) answers.emplace(a.item_id, std::move(a));
        const std::function<EvalRecord(std::size_t)> job = [&](std::size_t i) {
            auto it = answers.find(items[i].item_id);
            if (it == answers.end()) throw PreconditionViolation("no generated answer for item");
            return eval::evaluate_answer(judge, items[i], it->second.answer, it->second.generation.tokens.size());
        };
        auto describe = [&](std::size_t i) { return items[i].item_id + "/" + std::string(to_code(lang)); };
        const auto evals = compact(run_items<EvalRecord>(items.size(), config_.concurrency, job, describe, result));
        write_jsonl(evals, evals_path(lang, false));

        if (!fs::exists(refined_path(lang))) continue;
        std::map<std::string, refine::RefinementOutcome> outcomes;
        for (auto& o : read_jsonl<refine::RefinementOutcome>(refined_path(lang))) outcomes.emplace(o.item_id, o);
        std::map<std::string, EvalRecord> initial;
        for (const auto& e : evals) initial.emplace(e.item_id, e);
        const std::function<EvalRecord(std::size_t)> refined_job = [&](std::size_t i) {
            auto o = outcomes.find(items[i].item_id);
            if (o == outcomes.end()) throw PreconditionViolation("no refinement outcome for item");
            if (!o->second.refined) {
                if (auto e = initial.find(items[i].item_id); e != initial.end()) return e->second;
            }
            const auto& final_answer = o->second.final_answer;
            return eval::evaluate_answer(judge, items[i], final_answer, eval::tokenize(final_answer, lang).size());
        };
        StageResult sub{"evaluate"};
        const auto refined = compact(run_items<EvalRecord>(items.size(), config_.concurrency, refined_job, describe, sub));
        result.failures.insert(result.failures.end(), sub.failures.begin(), sub.failures.end());
        write_jsonl(refined, evals_path(lang, true));
    }
    return result;
}

report::Report Pipeline::report() {
    report::ReportInput input;
    input.languages = config_.languages;
    for (Language lang : config_.languages) {
        auto evals = read_jsonl<EvalRecord>(evals_path(lang, false));
        input.evals.insert(input.evals.end(), evals.begin(), evals.end());
        if (fs::exists(evals_path(lang, true))) {
            auto after = read_jsonl<EvalRecord>(evals_path(lang, true));
            input.refined_evals.insert(input.refined_evals.end(), after.begin(), after.end());
        }
        if (fs::exists(refined_path(lang))) {
            auto outcomes = read_jsonl<refine::RefinementOutcome>(refined_path(lang));
            input.refinements.insert(input.refinements.end(), outcomes.begin(), outcomes.end());
        }
    }
    const auto scores_dir = config_.work_dir / "scores";
    if (fs::exists(scores_dir)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(scores_dir)) {
            if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            auto rows = read_jsonl<ConfidenceRecord>(f);
            input.confidences.insert(input.confidences.end(), rows.begin(), rows.end());
        }
    }
    auto rep = report::build_report(input);
    write_file_atomic(config_.work_dir / "report.json", report::to_json(rep).dump(2) + "\n");
    write_file_atomic(config_.work_dir / "report.txt", report::render_table(rep));
    write_file_atomic(config_.work_dir / "auroc.csv", report::auroc_csv(rep));
    return rep;
}

std::vector<StageResult> Pipeline::run_all() {
    std::vector<StageResult> results;
    if (config_.source) results.push_back(build_dataset());
    results.push_back(generate(config_.languages));
    auto methods = config_.methods;
    if (config_.baselines.enabled) {
        methods.push_back(Method::TemperatureSampling);
        methods.push_back(Method::PromptPerturbation);
    }
    results.push_back(score(methods, config_.languages));
    std::vector<std::string> groupings;
    for (const auto& g : config_.groupings) {
        const bool covered = std::all_of(g.languages.begin(), g.languages.end(), [&](Language l) {
            return std::find(config_.languages.begin(), config_.languages.end(), l) != config_.languages.end();
        });
        if (covered) groupings.push_back(g.name);
        else spdlog::warn("skipping grouping {}: not all of its languages are configured", g.name);
    }
    results.push_back(aggregate(groupings));
    results.push_back(refine(config_.languages));
    results.push_back(evaluate(config_.languages));
    report();
    return results;
}

std::size_t Pipeline::purge_cache(const std::optional<std::string>& model_id) {
    if (!config_.cache_dir) throw ConfigError("no cache directory configured");
    return backend::ResponseCache(*config_.cache_dir).purge(model_id);
}

}  // namespace mlconf::pipeline
