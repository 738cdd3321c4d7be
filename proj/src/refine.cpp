#include "mlconf/refine.hpp"

#include <charconv>
#include <cstdio>

#include "mlconf/error.hpp"
#include "mlconf/util.hpp"

namespace mlconf::refine {

FeedbackPolicy FeedbackPolicy::fixed(double k) {
    FeedbackPolicy p{PolicyKind::FixedValue, k, std::nullopt};
    p.validate();
    return p;
}

FeedbackPolicy FeedbackPolicy::random(std::uint64_t seed) {
    return FeedbackPolicy{PolicyKind::RandomSampling, std::nullopt, seed};
}

FeedbackPolicy FeedbackPolicy::parse(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) throw ConfigError("policy must be fixed:<k> or random:<seed>");
    const auto kind = spec.substr(0, colon);
    const std::string value(spec.substr(colon + 1));
    try {
        std::size_t used = 0;
        if (kind == "fixed") {
            const double k = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            return fixed(k);
        }
        if (kind == "random") {
            const auto seed = std::stoull(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            return random(seed);
        }
    } catch (const std::logic_error&) {
        throw ConfigError("malformed policy value '" + value + "'");
    }
    throw ConfigError("unknown policy kind '" + std::string(kind) + "'");
}

std::string FeedbackPolicy::to_string() const {
    if (kind == PolicyKind::FixedValue) return "fixed:" + format_confidence(*k);
    return "random:" + std::to_string(*seed);
}

void FeedbackPolicy::validate() const {
    if (kind == PolicyKind::FixedValue) {
        if (!k || seed) throw InvalidArgument("fixed policy needs k and no seed");
        if (!(*k >= 0.0 && *k <= 1.0)) throw InvalidArgument("threshold k must lie in [0,1]");
    } else if (!seed || k) {
        throw InvalidArgument("random policy needs a seed and no k");
    }
}

Decision decide_refine(double conf, const FeedbackPolicy& policy, std::size_t item_index) {
    policy.validate();
    double k = 0.0;
    if (policy.kind == PolicyKind::FixedValue) {
        k = *policy.k;
    } else {
        SeededRng rng(*policy.seed, item_index);
        k = rng.uniform01();
    }
    return Decision{conf <= k, k};
}

std::string format_confidence(double conf) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", conf);
    return buf;
}

backend::GenerationRequest refinement_request(const prompts::PromptLibrary& prompts, const QAItem& item,
                                              const std::string& initial, double conf, double temperature,
                                              bool want_token_probs) {
    backend::GenerationRequest req;
    req.prompt_messages = prompts.render(
        prompts::Purpose::Refine, item.language,
        {{"question", item.question}, {"answer", initial}, {"confidence", format_confidence(conf)}});
    req.temperature = temperature;
    req.want_token_probs = want_token_probs;
    return req;
}

Revision refine_answer(const confidence::Elicitation& ctx, const QAItem& item, const std::string& initial,
                       double conf, double temperature, bool want_token_probs) {
    const auto req = refinement_request(ctx.prompts, item, initial, conf, temperature, want_token_probs);
    auto gen = ctx.backend.generate(req, 0).generation;
    Revision rev;
    rev.text = answer_text(gen);
    rev.generation = std::move(gen);
    if (rev.text.empty()) {
        rev.text = initial;
        rev.flags.insert(kEmptyRevisionFlag);
    }
    return rev;
}

void to_json(json& j, const RefinementOutcome& o) {
    j = json{{"item_id", o.item_id},
             {"language", std::string(to_code(o.language))},
             {"refined", o.refined},
             {"threshold_used", o.threshold_used},
             {"initial_answer", o.initial_answer},
             {"final_answer", o.final_answer},
             {"initial_conf", o.initial_conf},
             {"final_conf", o.final_conf ? json(*o.final_conf) : json(nullptr)},
             {"flags", o.flags}};
    if (o.error) j["error"] = *o.error;
}

void from_json(const json& j, RefinementOutcome& o) {
    o.item_id = j.at("item_id").get<std::string>();
    o.language = parse_language(j.at("language").get<std::string>()).code;
    o.refined = j.at("refined").get<bool>();
    o.threshold_used = j.at("threshold_used").get<double>();
    o.initial_answer = j.at("initial_answer").get<std::string>();
    o.final_answer = j.at("final_answer").get<std::string>();
    o.initial_conf = j.at("initial_conf").get<double>();
    o.final_conf.reset();
    if (auto it = j.find("final_conf"); it != j.end() && !it->is_null()) o.final_conf = it->get<double>();
    o.flags = j.value("flags", std::set<std::string>{});
    o.error.reset();
    if (auto it = j.find("error"); it != j.end()) o.error = it->get<std::string>();
}

std::vector<RefinementOutcome> run_refinement(const confidence::Elicitation& ctx,
                                              const std::vector<RefinementInput>& inputs,
                                              const FeedbackPolicy& policy, const RefineOptions& options) {
    policy.validate();
    const std::function<RefinementOutcome(std::size_t)> one = [&](std::size_t i) {
        const auto& in = inputs[i];
        RefinementOutcome out;
        out.item_id = in.item.item_id;
        out.language = in.item.language;
        out.initial_answer = in.initial_answer;
        out.final_answer = in.initial_answer;
        out.initial_conf = in.initial_conf;
        try {
            const auto d = decide_refine(in.initial_conf, policy, in.item_index.value_or(i));
            out.threshold_used = d.threshold;
            if (d.refine) {
                auto rev = refine_answer(ctx, in.item, in.initial_answer, in.initial_conf, options.temperature,
                                         options.rescore && is_likelihood(*options.rescore));
                out.refined = true;
                out.final_answer = rev.text;
                out.flags = rev.flags;
                if (options.rescore) {
                    out.final_conf = confidence::estimate(*options.rescore, ctx, in.item, rev.generation).score;
                }
            } else if (options.rescore) {
                out.final_conf = in.initial_conf;
            }
        } catch (const Error& e) {
            out.refined = false;
            out.final_answer = in.initial_answer;
            out.final_conf.reset();
            out.flags.insert(kRefineErrorFlag);
            out.error = e.code() + ": " + e.what();
        }
        return out;
    };
    return parallel_map<RefinementOutcome>(inputs.size(), options.workers, one);
}

}  // namespace mlconf::refine
