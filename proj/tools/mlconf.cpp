// Command-line driver for the staged confidence-estimation pipeline.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

#include "mlconf/error.hpp"
#include "mlconf/pipeline.hpp"
#include "mlconf/prompts.hpp"
#include "mlconf/util.hpp"

namespace {

using mlconf::json;
namespace pl = mlconf::pipeline;

struct Flags {
    std::string config;
    std::string work_dir;
    std::string cache_dir;
    std::string audit;
    std::string policy;
    std::string format = "table";
    std::optional<std::size_t> concurrency;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> languages;
    std::vector<std::string> methods;
    std::vector<std::string> groupings;
    std::string source;
    std::optional<std::size_t> top_n;
    std::optional<std::size_t> review_sample;
    std::string base_method;
    std::string model;
    std::string templates_out;
    bool verbose = false;
};

void emit_error(const std::string& code, const std::string& message) {
    std::cerr << json{{"error", code}, {"message", message}}.dump(-1, ' ', false, json::error_handler_t::replace)
              << std::endl;
}

pl::Config resolve_config(const Flags& f) {
    pl::Config c;
    if (!f.config.empty()) {
        c = pl::load_config(f.config);
    } else {
        throw mlconf::ConfigError("--config is required for this command");
    }
    const auto cwd = std::filesystem::current_path();
    auto abs = [&](const std::string& p) { return std::filesystem::absolute(cwd / p); };
    if (!f.work_dir.empty()) {
        const bool default_dataset = c.dataset_dir == c.work_dir / "dataset";
        c.work_dir = abs(f.work_dir);
        if (default_dataset) c.dataset_dir = c.work_dir / "dataset";
    }
    if (!f.cache_dir.empty()) c.cache_dir = abs(f.cache_dir);
    if (!f.audit.empty()) c.audit_path = abs(f.audit);
    if (!f.source.empty()) c.source = abs(f.source);
    if (f.concurrency) {
        if (*f.concurrency < 1) throw mlconf::ConfigError("--concurrency must be at least 1");
        c.concurrency = *f.concurrency;
    }
    if (f.seed) c.seed = *f.seed;
    if (!f.policy.empty()) c.policy = mlconf::refine::FeedbackPolicy::parse(f.policy);
    if (f.top_n) c.top_n = *f.top_n;
    if (f.review_sample) c.review_sample = *f.review_sample;
    if (!f.base_method.empty()) c.aggregate_method = mlconf::parse_method(f.base_method);
    return c;
}

std::vector<mlconf::Language> languages_or(const Flags& f, const pl::Config& c) {
    if (f.languages.empty()) return c.languages;
    std::vector<mlconf::Language> out;
    for (const auto& code : f.languages) out.push_back(mlconf::parse_language(code).code);
    return out;
}

int finish(const std::vector<pl::StageResult>& results) {
    std::size_t failed = 0;
    std::string first;
    for (const auto& r : results) {
        std::cout << r.summary().dump() << "\n";
        failed += r.failures.size();
        if (first.empty() && !r.failures.empty()) first = r.stage + ": " + r.failures.front();
    }
    std::cout.flush();
    if (failed) {
        emit_error("StageIncomplete", std::to_string(failed) + " item(s) produced no record; first: " + first);
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multilingual confidence estimation pipeline"};
    app.require_subcommand(1);
    Flags f;

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", f.config, "Pipeline config JSON");
        sub->add_option("--work-dir", f.work_dir, "Artifact directory (overrides config)");
        sub->add_option("--cache-dir", f.cache_dir, "Response cache directory");
        sub->add_option("--audit", f.audit, "Append every backend request to this JSONL file");
        sub->add_option("--concurrency", f.concurrency, "Maximum in-flight requests and workers");
        sub->add_option("--seed", f.seed, "Seed for sampling");
        sub->add_flag("-v,--verbose", f.verbose, "Debug logging");
    };
    auto with_languages = [&](CLI::App* sub) {
        sub->add_option("--language,--languages", f.languages, "Language codes")->delimiter(',');
    };

    auto* build = app.add_subcommand("build-dataset", "Translate, filter and export the parallel corpus");
    common(build);
    with_languages(build);
    build->add_option("--source", f.source, "English JSONL source items");
    build->add_option("--top-n", f.top_n, "Pairs retained per language");
    build->add_option("--review-sample", f.review_sample, "Rows in the review sheet");

    auto* gen = app.add_subcommand("generate", "Generate answers");
    common(gen);
    with_languages(gen);

    auto* score = app.add_subcommand("score", "Score answers with confidence methods");
    common(score);
    with_languages(score);
    score->add_option("--method,--methods", f.methods, "Method names")->delimiter(',');

    auto* agg = app.add_subcommand("aggregate", "Cross-lingual aggregation");
    common(agg);
    agg->add_option("--grouping,--groupings", f.groupings, "Grouping names")->delimiter(',');
    agg->add_option("--method", f.base_method, "Monolingual method to aggregate");

    auto* ref = app.add_subcommand("refine", "Confidence-gated refinement");
    common(ref);
    with_languages(ref);
    ref->add_option("--policy", f.policy, "fixed:<k> or random:<seed>");

    auto* ev = app.add_subcommand("evaluate", "EM, F1 and NLI evaluation");
    common(ev);
    with_languages(ev);

    auto* rep = app.add_subcommand("report", "Render result tables");
    common(rep);
    rep->add_option("--format", f.format, "json or table")->check(CLI::IsMember({"json", "table"}));

    auto* all = app.add_subcommand("run-all", "Every stage in order");
    common(all);
    all->add_option("--policy", f.policy, "fixed:<k> or random:<seed>");
    all->add_option("--format", f.format, "json or table")->check(CLI::IsMember({"json", "table"}));

    auto* purge = app.add_subcommand("purge-cache", "Delete cached responses");
    common(purge);
    purge->add_option("--model", f.model, "Only entries of this model id");

    auto* templates = app.add_subcommand("templates", "Prompt template utilities");
    templates->require_subcommand(1);
    auto* texport = templates->add_subcommand("export", "Write the default templates to a directory");
    texport->add_option("dir", f.templates_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        emit_error("UsageError", e.what());
        return 2;
    }

    spdlog::set_default_logger(spdlog::stderr_color_mt("mlconf"));
    spdlog::set_level(f.verbose ? spdlog::level::debug : spdlog::level::warn);

    try {
        if (*texport) {
            mlconf::prompts::PromptLibrary::defaults().export_to(f.templates_out);
            return 0;
        }
        if (*purge && f.config.empty()) {
            if (f.cache_dir.empty()) throw mlconf::ConfigError("purge-cache needs --cache-dir or --config");
            mlconf::backend::ResponseCache cache(f.cache_dir);
            const auto n = cache.purge(f.model.empty() ? std::nullopt : std::optional<std::string>(f.model));
            std::cout << json{{"purged", n}}.dump() << "\n";
            return 0;
        }

        pl::Pipeline pipeline(resolve_config(f));
        const auto& cfg = pipeline.config();
        if (*purge) {
            const auto n = pipeline.purge_cache(f.model.empty() ? std::nullopt : std::optional<std::string>(f.model));
            std::cout << json{{"purged", n}}.dump() << "\n";
            return 0;
        }
        if (*build) {
            if (!f.languages.empty()) {
                auto c = cfg;
                c.languages = languages_or(f, cfg);
                if (std::find(c.languages.begin(), c.languages.end(), mlconf::Language::En) == c.languages.end()) {
                    c.languages.insert(c.languages.begin(), mlconf::Language::En);
                }
                pl::Pipeline custom(std::move(c));
                return finish({custom.build_dataset()});
            }
            return finish({pipeline.build_dataset()});
        }
        if (*gen) return finish({pipeline.generate(languages_or(f, cfg))});
        if (*score) {
            std::vector<mlconf::Method> methods;
            for (const auto& m : f.methods) methods.push_back(mlconf::parse_method(m));
            if (methods.empty()) methods = cfg.methods;
            return finish({pipeline.score(methods, languages_or(f, cfg))});
        }
        if (*agg) {
            auto names = f.groupings;
            if (names.empty()) {
                for (const auto& g : cfg.groupings) names.push_back(g.name);
            }
            return finish({pipeline.aggregate(names)});
        }
        if (*ref) return finish({pipeline.refine(languages_or(f, cfg))});
        if (*ev) return finish({pipeline.evaluate(languages_or(f, cfg))});

        const auto report_path = cfg.work_dir / (f.format == "json" ? "report.json" : "report.txt");
        if (*rep) {
            pipeline.report();
            std::cout << mlconf::read_file(report_path);
            return 0;
        }
        const auto results = pipeline.run_all();
        std::cout << mlconf::read_file(report_path);
        return finish(results);
    } catch (const mlconf::Error& e) {
        emit_error(e.code(), e.what());
    } catch (const std::exception& e) {
        emit_error("InternalError", e.what());
    }
    return 1;
}
