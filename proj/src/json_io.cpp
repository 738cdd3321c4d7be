#include "mlconf/json_io.hpp"

#include "mlconf/error.hpp"

namespace mlconf {
namespace {

template <typename T>
T required(const json& j, const char* key) {
    if (!j.is_object()) throw InvalidArgument("expected a JSON object");
    auto it = j.find(key);
    if (it == j.end()) throw InvalidArgument(std::string("missing field '") + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw InvalidArgument(std::string("field '") + key + "' has the wrong type");
    }
}

std::set<std::string> optional_flags(const json& j) {
    if (auto it = j.find("flags"); it != j.end()) return it->get<std::set<std::string>>();
    return {};
}

}  // namespace

void to_json(json& j, const QAItem& item) {
    j = json{{"item_id", item.item_id},
             {"language", std::string(to_code(item.language))},
             {"question", item.question},
             {"gold_answers", item.gold_answers}};
}

void from_json(const json& j, QAItem& item) {
    item.item_id = required<std::string>(j, "item_id");
    item.language = parse_language(required<std::string>(j, "language")).code;
    item.question = required<std::string>(j, "question");
    item.gold_answers = required<std::vector<std::string>>(j, "gold_answers");
    validate_item(item);
}

void to_json(json& j, const Token& token) {
    j = json{{"text", token.text}, {"prob", token.prob}};
    if (!token.alternatives.empty()) {
        json alts = json::array();
        for (const auto& a : token.alternatives) alts.push_back(json{{"text", a.text}, {"prob", a.prob}});
        j["alternatives"] = std::move(alts);
    }
}

void from_json(const json& j, Token& token) {
    token.text = required<std::string>(j, "text");
    token.prob = required<double>(j, "prob");
    token.alternatives.clear();
    if (auto it = j.find("alternatives"); it != j.end()) {
        for (const auto& a : *it) {
            token.alternatives.push_back({required<std::string>(a, "text"), required<double>(a, "prob")});
        }
    }
}

void to_json(json& j, const Generation& gen) {
    j = json{{"text", gen.text},
             {"tokens", gen.tokens},
             {"probs_available", gen.probs_available},
             {"model_id", gen.model_id},
             {"temperature", gen.temperature},
             {"prompt_fingerprint", gen.prompt_fingerprint}};
}

void from_json(const json& j, Generation& gen) {
    gen.text = required<std::string>(j, "text");
    gen.tokens = required<std::vector<Token>>(j, "tokens");
    gen.probs_available = j.value("probs_available", true);
    gen.model_id = required<std::string>(j, "model_id");
    gen.temperature = required<double>(j, "temperature");
    gen.prompt_fingerprint = j.value("prompt_fingerprint", std::string{});
}

void to_json(json& j, const ConfidenceRecord& rec) {
    j = json{{"item_id", rec.item_id},
             {"language", std::string(to_code(rec.language))},
             {"method", std::string(to_string(rec.method))},
             {"score", rec.score},
             {"flags", rec.flags}};
    if (rec.base_method) j["base_method"] = std::string(to_string(*rec.base_method));
    if (rec.grouping) j["grouping"] = *rec.grouping;
}

void from_json(const json& j, ConfidenceRecord& rec) {
    rec = make_record(required<std::string>(j, "item_id"),
                      parse_language(required<std::string>(j, "language")).code,
                      parse_method(required<std::string>(j, "method")),
                      required<double>(j, "score"));
    rec.flags = optional_flags(j);
    if (auto it = j.find("base_method"); it != j.end()) rec.base_method = parse_method(it->get<std::string>());
    if (auto it = j.find("grouping"); it != j.end()) rec.grouping = it->get<std::string>();
}

void to_json(json& j, const LanguageGrouping& g) {
    json langs = json::array();
    for (Language l : g.languages) langs.push_back(std::string(to_code(l)));
    j = json{{"name", g.name},
             {"mode", std::string(to_string(g.mode))},
             {"languages", std::move(langs)},
             {"pivot", std::string(to_code(g.pivot))}};
}

void from_json(const json& j, LanguageGrouping& g) {
    g.name = required<std::string>(j, "name");
    g.mode = parse_grouping_mode(required<std::string>(j, "mode"));
    g.languages.clear();
    for (const auto& code : required<std::vector<std::string>>(j, "languages")) {
        g.languages.push_back(parse_language(code).code);
    }
    g.pivot = parse_language(j.value("pivot", std::string("en"))).code;
}

void to_json(json& j, const EvalRecord& rec) {
    j = json{{"item_id", rec.item_id},
             {"language", std::string(to_code(rec.language))},
             {"em", rec.em},
             {"f1", rec.f1},
             {"nli_correct", rec.nli_correct},
             {"token_length", rec.token_length},
             {"flags", rec.flags}};
    if (rec.confidence) j["confidence"] = *rec.confidence;
}

void from_json(const json& j, EvalRecord& rec) {
    rec.item_id = required<std::string>(j, "item_id");
    rec.language = parse_language(required<std::string>(j, "language")).code;
    rec.em = required<int>(j, "em");
    rec.f1 = required<double>(j, "f1");
    rec.nli_correct = required<int>(j, "nli_correct");
    rec.token_length = j.value("token_length", std::size_t{0});
    rec.flags = optional_flags(j);
    rec.confidence.reset();
    if (auto it = j.find("confidence"); it != j.end() && !it->is_null()) rec.confidence = it->get<double>();
    if ((rec.em != 0 && rec.em != 1) || (rec.nli_correct != 0 && rec.nli_correct != 1) ||
        !(rec.f1 >= 0.0 && rec.f1 <= 1.0)) {
        throw InvalidArgument("eval record fields out of range");
    }
}

std::string dump_line(const json& j) {
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace mlconf
