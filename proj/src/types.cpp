#include "mlconf/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "mlconf/error.hpp"
#include "mlconf/text.hpp"

namespace mlconf {
namespace {

struct LanguageInfo {
    Language lang;
    std::string_view code;
    std::string_view name;
    Family family;
};

// Family assignments follow the toolkit's reference table; Indonesian is
// grouped with the Indo-European set there.
constexpr std::array<LanguageInfo, 10> kLanguageTable = {{
    {Language::En, "en", "English", Family::IndoEuropean},
    {Language::It, "it", "Italian", Family::IndoEuropean},
    {Language::Id, "id", "Indonesian", Family::IndoEuropean},
    {Language::Fr, "fr", "French", Family::IndoEuropean},
    {Language::De, "de", "German", Family::IndoEuropean},
    {Language::Zh, "zh", "Chinese", Family::SinoTibetan},
    {Language::Ja, "ja", "Japanese", Family::JapaneseRyukyuan},
    {Language::Ar, "ar", "Arabic", Family::AfroAsiatic},
    {Language::Ko, "ko", "Korean", Family::Koreanic},
    {Language::Th, "th", "Thai", Family::KraDai},
}};

const LanguageInfo& info(Language lang) {
    return kLanguageTable[static_cast<std::size_t>(lang)];
}

struct MethodName {
    Method method;
    std::string_view name;
};

constexpr std::array<MethodName, 9> kMethodNames = {{
    {Method::LikelihoodMin, "likelihood-min"},
    {Method::LikelihoodAvg, "likelihood-avg"},
    {Method::LikelihoodNorm, "likelihood-norm"},
    {Method::TrueProbability, "true-probability"},
    {Method::VerbalNumber, "verbal-number"},
    {Method::VerbalWord, "verbal-word"},
    {Method::TemperatureSampling, "temperature-sampling"},
    {Method::PromptPerturbation, "prompt-perturbation"},
    {Method::CrossLingual, "cross-lingual"},
}};

bool blank(std::string_view s) { return text::trim(s).empty(); }

}  // namespace

LanguageCode parse_language(std::string_view code_text) {
    std::string lowered;
    for (char c : code_text) {
        lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    for (const auto& entry : kLanguageTable) {
        if (entry.code == lowered) return LanguageCode{entry.lang, entry.family};
    }
    throw UnknownLanguage("unsupported language code '" + std::string(code_text) + "'");
}

std::string_view to_code(Language lang) { return info(lang).code; }
std::string_view english_name(Language lang) { return info(lang).name; }
Family family_of(Language lang) { return info(lang).family; }

std::string_view to_string(Family family) {
    switch (family) {
        case Family::IndoEuropean: return "Indo-European";
        case Family::SinoTibetan: return "Sino-Tibetan";
        case Family::JapaneseRyukyuan: return "Japanese-Ryukyuan";
        case Family::AfroAsiatic: return "Afro-Asiatic";
        case Family::Koreanic: return "Koreanic";
        case Family::KraDai: return "Kra-Dai";
    }
    return "?";
}

bool uses_character_tokens(Language lang) {
    return lang == Language::Zh || lang == Language::Ja || lang == Language::Th;
}

void validate_item(const QAItem& item) {
    if (item.item_id.empty()) throw InvalidArgument("item_id is empty");
    if (blank(item.question)) throw InvalidArgument("question is empty");
    if (item.gold_answers.empty()) throw InvalidArgument("gold_answers is empty");
    for (const auto& g : item.gold_answers) {
        if (blank(g)) throw InvalidArgument("gold answer is empty");
    }
}

void validate_generation(const Generation& gen) {
    std::string joined;
    for (const auto& t : gen.tokens) {
        if (!(t.prob > 0.0 && t.prob <= 1.0)) {
            throw InvalidArgument("token probability outside (0,1]");
        }
        joined += t.text;
    }
    if (joined != gen.text) throw InvalidArgument("token texts do not concatenate to text");
    if (!gen.text.empty() && gen.tokens.empty()) {
        throw InvalidArgument("non-empty text without tokens");
    }
    if (gen.temperature < 0.0) throw InvalidArgument("negative temperature");
}

std::string answer_text(const Generation& gen) {
    for (const auto& line : text::split_lines(gen.text)) {
        auto t = text::trim(line);
        if (!t.empty()) return t;
    }
    return {};
}

std::string_view to_string(Method method) {
    for (const auto& m : kMethodNames) {
        if (m.method == method) return m.name;
    }
    return "?";
}

Method parse_method(std::string_view name) {
    for (const auto& m : kMethodNames) {
        if (m.name == name) return m.method;
    }
    throw UnknownMethod("unknown confidence method '" + std::string(name) + "'");
}

bool is_monolingual(Method method) {
    return std::find(kMonolingualMethods.begin(), kMonolingualMethods.end(), method) !=
           kMonolingualMethods.end();
}

bool is_likelihood(Method method) {
    return method == Method::LikelihoodMin || method == Method::LikelihoodAvg ||
           method == Method::LikelihoodNorm;
}

ConfidenceRecord make_record(std::string item_id, Language language, Method method,
                             double score) {
    if (!(score >= 0.0 && score <= 1.0)) {
        throw InvalidArgument("confidence score outside [0,1]: " + std::to_string(score));
    }
    ConfidenceRecord rec;
    rec.item_id = std::move(item_id);
    rec.language = language;
    rec.method = method;
    rec.score = score;
    return rec;
}

std::string_view to_string(GroupingMode mode) {
    switch (mode) {
        case GroupingMode::Shared: return "shared";
        case GroupingMode::Distinct: return "distinct";
        case GroupingMode::Mixed: return "mixed";
    }
    return "?";
}

GroupingMode parse_grouping_mode(std::string_view t) {
    const auto lowered = text::lowercase(t);
    if (lowered == "shared") return GroupingMode::Shared;
    if (lowered == "distinct") return GroupingMode::Distinct;
    if (lowered == "mixed") return GroupingMode::Mixed;
    throw InvalidArgument("unknown grouping mode '" + std::string(t) + "'");
}

GroupingMode infer_mode(const std::vector<Language>& languages, Language pivot) {
    const Family pf = family_of(pivot);
    bool all_same = true;
    bool others_distinct = true;
    for (Language l : languages) {
        if (family_of(l) != pf) all_same = false;
        if (l != pivot && family_of(l) == pf) others_distinct = false;
    }
    if (all_same) return GroupingMode::Shared;
    if (others_distinct) return GroupingMode::Distinct;
    return GroupingMode::Mixed;
}

ValidatedGrouping validate_grouping(LanguageGrouping grouping) {
    if (grouping.languages.empty()) throw InvalidArgument("grouping has no languages");
    for (std::size_t i = 0; i < grouping.languages.size(); ++i) {
        for (std::size_t j = i + 1; j < grouping.languages.size(); ++j) {
            if (grouping.languages[i] == grouping.languages[j]) {
                throw InvalidArgument("grouping lists a language twice");
            }
        }
    }
    if (std::find(grouping.languages.begin(), grouping.languages.end(), grouping.pivot) ==
        grouping.languages.end()) {
        throw InvalidArgument("pivot is not a member of the grouping");
    }

    const Family pf = family_of(grouping.pivot);
    const auto mismatch = [&](Language l, const char* why) {
        return GroupingModeMismatch(std::string(to_code(l)),
                                    "grouping '" + grouping.name + "': " +
                                        std::string(to_code(l)) + " " + why);
    };
    switch (grouping.mode) {
        case GroupingMode::Shared:
            for (Language l : grouping.languages) {
                if (family_of(l) != pf) throw mismatch(l, "is outside the pivot's family");
            }
            break;
        case GroupingMode::Distinct:
            for (Language l : grouping.languages) {
                if (l != grouping.pivot && family_of(l) == pf) {
                    throw mismatch(l, "shares the pivot's family");
                }
            }
            break;
        case GroupingMode::Mixed:
            if (infer_mode(grouping.languages, grouping.pivot) != GroupingMode::Mixed) {
                // Name the first non-pivot member; the set is homogeneous
                // relative to the pivot so any of them suffices.
                for (Language l : grouping.languages) {
                    if (l != grouping.pivot) throw mismatch(l, "does not make the set mixed");
                }
                throw mismatch(grouping.pivot, "alone does not make the set mixed");
            }
            break;
    }
    return ValidatedGrouping(std::move(grouping));
}

}  // namespace mlconf
