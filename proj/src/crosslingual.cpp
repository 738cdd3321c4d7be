#include "mlconf/crosslingual.hpp"

#include <algorithm>
#include <regex>

#include "mlconf/error.hpp"
#include "mlconf/text.hpp"
#include "mlconf/util.hpp"

namespace mlconf::crosslingual {

ConfidenceRecord cross_lingual_confidence(const std::map<Language, ConfidenceRecord>& records,
                                          const ValidatedGrouping& grouping) {
    const auto& g = grouping.get();
    const ConfidenceRecord* first = nullptr;
    double sum = 0.0;
    std::set<std::string> flags;
    for (Language l : g.languages) {
        auto it = records.find(l);
        if (it == records.end()) throw MissingLanguage(std::string(to_code(l)));
        const auto& rec = it->second;
        if (first == nullptr) {
            first = &rec;
        } else if (rec.item_id != first->item_id) {
            throw MixedItems("records for '" + first->item_id + "' and '" + rec.item_id + "'");
        } else if (rec.method != first->method || rec.base_method != first->base_method) {
            throw MixedMethods("records for item '" + rec.item_id + "' mix estimation methods");
        }
        sum += rec.score;
        flags.insert(rec.flags.begin(), rec.flags.end());
    }
    const double mean = std::clamp(sum / static_cast<double>(g.languages.size()), 0.0, 1.0);
    auto out = make_record(first->item_id, g.pivot, Method::CrossLingual, mean);
    out.flags = std::move(flags);
    out.base_method = first->method;
    out.grouping = g.name;
    return out;
}

std::vector<LanguageGrouping> standard_groupings() {
    using L = Language;
    using M = GroupingMode;
    return {
        {"en", M::Shared, {L::En}, L::En},
        {"shared2", M::Shared, {L::En, L::De}, L::En},
        {"shared3", M::Shared, {L::En, L::Fr, L::De}, L::En},
        {"shared5", M::Shared, {L::En, L::Fr, L::De, L::It, L::Id}, L::En},
        {"distinct2", M::Distinct, {L::En, L::Zh}, L::En},
        {"distinct4", M::Distinct, {L::En, L::Zh, L::Ko, L::Ja}, L::En},
        {"distinct6", M::Distinct, {L::En, L::Zh, L::Ko, L::Th, L::Ar, L::Ja}, L::En},
        {"mixed3", M::Mixed, {L::En, L::Zh, L::Fr}, L::En},
        {"mixed5", M::Mixed, {L::En, L::Zh, L::Ja, L::Fr, L::De}, L::En},
        {"all", M::Mixed, {kAllLanguages.begin(), kAllLanguages.end()}, L::En},
    };
}

const LanguageGrouping& find_grouping(const std::vector<LanguageGrouping>& groupings, std::string_view name) {
    for (const auto& g : groupings) {
        if (g.name == name) return g;
    }
    throw ConfigError("unknown grouping '" + std::string(name) + "'");
}

namespace {

ConfidenceRecord wrap_mean(const QAItem& item, Method method, Method base, const std::vector<ConfidenceRecord>& parts) {
    double sum = 0.0;
    std::set<std::string> flags;
    for (const auto& p : parts) {
        sum += p.score;
        flags.insert(p.flags.begin(), p.flags.end());
    }
    auto rec = make_record(item.item_id, item.language, method,
                           std::clamp(sum / static_cast<double>(parts.size()), 0.0, 1.0));
    rec.flags = std::move(flags);
    rec.base_method = base;
    return rec;
}

}  // namespace

ConfidenceRecord temperature_sampling_confidence(const confidence::Elicitation& ctx, const QAItem& item,
                                                 Method base_method, const SamplingOptions& options) {
    if (options.samples < 1) throw PreconditionViolation("temperature sampling needs at least one sample");
    if (!is_monolingual(base_method)) throw PreconditionViolation("base method must be monolingual");
    const auto req = confidence::answer_request(ctx.prompts, item, options.temperature, options.max_tokens);
    std::vector<ConfidenceRecord> parts;
    for (int i = 0; i < options.samples; ++i) {
        const auto gen = ctx.backend.generate(req, i).generation;
        parts.push_back(confidence::estimate(base_method, ctx, item, gen));
    }
    return wrap_mean(item, Method::TemperatureSampling, base_method, parts);
}

ConfidenceRecord prompt_perturbation_confidence(const confidence::Elicitation& ctx, const QAItem& item,
                                                const std::vector<std::string>& paraphrases,
                                                Method base_method, const SamplingOptions& options) {
    if (paraphrases.empty()) throw PreconditionViolation("prompt perturbation needs at least one paraphrase");
    if (!is_monolingual(base_method)) throw PreconditionViolation("base method must be monolingual");
    std::vector<ConfidenceRecord> parts;
    for (const auto& p : paraphrases) {
        QAItem variant = item;
        variant.question = p;
        const auto req = confidence::answer_request(ctx.prompts, variant, options.temperature, options.max_tokens);
        const auto gen = ctx.backend.generate(req, 0).generation;
        parts.push_back(confidence::estimate(base_method, ctx, variant, gen));
    }
    return wrap_mean(item, Method::PromptPerturbation, base_method, parts);
}

std::vector<std::string> generate_paraphrases(const confidence::Elicitation& ctx, const QAItem& item, int count) {
    if (count < 1) throw PreconditionViolation("paraphrase count must be positive");
    backend::GenerationRequest req;
    req.prompt_messages = ctx.prompts.render(prompts::Purpose::Paraphrase, item.language,
                                             {{"question", item.question}, {"count", std::to_string(count)}});
    req.temperature = ctx.temperature;
    req.max_tokens = std::max(ctx.max_tokens, 64 * count);
    const auto reply = ctx.backend.generate(req, 0).generation.text;

    static const std::regex numbering(R"(^\s*(?:\d+[.)]|[-*•])\s*)");
    std::vector<std::string> out;
    for (const auto& line : text::split_lines(reply)) {
        auto cleaned = text::trim(std::regex_replace(line, numbering, ""));
        if (cleaned.empty() || std::find(out.begin(), out.end(), cleaned) != out.end()) continue;
        out.push_back(std::move(cleaned));
        if (static_cast<int>(out.size()) == count) break;
    }
    if (out.empty()) throw EmptyGeneration("paraphrase reply contained no questions");
    return out;
}

std::map<Language, std::vector<ConfidenceRecord>> noisy_scores(const std::vector<int>& labels,
                                                               const std::vector<Language>& languages,
                                                               const NoiseModel& model) {
    if (model.noise < 0.0) throw InvalidArgument("noise half-width must be non-negative");
    std::map<Language, std::vector<ConfidenceRecord>> out;
    for (Language lang : languages) {
        SeededRng rng(model.seed, static_cast<std::uint64_t>(lang));
        auto& list = out[lang];
        list.reserve(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const double center = labels[i] ? model.correct_center : model.incorrect_center;
            const double eps = (2.0 * rng.uniform01() - 1.0) * model.noise;
            const double score = std::clamp(center + eps, 0.0, 1.0);
            list.push_back(make_record("item-" + std::to_string(i), lang, Method::VerbalNumber, score));
        }
    }
    return out;
}

}  // namespace mlconf::crosslingual
