#pragma once

// Shared domain vocabulary: languages, QA items, generations, confidence
// records and language groupings.

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mlconf {

enum class Family {
    IndoEuropean,
    SinoTibetan,
    JapaneseRyukyuan,
    AfroAsiatic,
    Koreanic,
    KraDai,
};

enum class Language : std::uint8_t { En, It, Id, Fr, De, Zh, Ja, Ar, Ko, Th };

inline constexpr std::array<Language, 10> kAllLanguages = {
    Language::En, Language::It, Language::Id, Language::Fr, Language::De,
    Language::Zh, Language::Ja, Language::Ar, Language::Ko, Language::Th,
};

struct LanguageCode {
    Language code;
    Family family;

    friend bool operator==(const LanguageCode&, const LanguageCode&) = default;
};

// Case-insensitive; throws UnknownLanguage.
LanguageCode parse_language(std::string_view code_text);
std::string_view to_code(Language lang);
std::string_view english_name(Language lang);
std::string_view to_string(Family family);
Family family_of(Language lang);

// Scripts written without whitespace word boundaries.
bool uses_character_tokens(Language lang);

struct QAItem {
    std::string item_id;
    Language language = Language::En;
    std::string question;
    std::vector<std::string> gold_answers;

    friend bool operator==(const QAItem&, const QAItem&) = default;
};

// Throws InvalidArgument when question or any gold answer is blank.
void validate_item(const QAItem& item);

struct TokenAlternative {
    std::string text;
    double prob = 0.0;

    friend bool operator==(const TokenAlternative&, const TokenAlternative&) = default;
};

struct Token {
    std::string text;
    double prob = 1.0;
    std::vector<TokenAlternative> alternatives;

    friend bool operator==(const Token&, const Token&) = default;
};

struct Generation {
    std::string text;
    std::vector<Token> tokens;
    // False when the backend returned no token probabilities; tokens then
    // hold a single placeholder token covering the whole text.
    bool probs_available = true;
    std::string model_id;
    double temperature = 0.0;
    std::string prompt_fingerprint;

    friend bool operator==(const Generation&, const Generation&) = default;
};

// Throws InvalidArgument if the token/text invariants do not hold.
void validate_generation(const Generation& gen);

// The generation text reduced to the answer: first non-empty line, trimmed.
std::string answer_text(const Generation& gen);

enum class Method {
    LikelihoodMin,
    LikelihoodAvg,
    LikelihoodNorm,
    TrueProbability,
    VerbalNumber,
    VerbalWord,
    TemperatureSampling,
    PromptPerturbation,
    CrossLingual,
};

inline constexpr std::array<Method, 6> kMonolingualMethods = {
    Method::LikelihoodMin,   Method::LikelihoodAvg, Method::LikelihoodNorm,
    Method::TrueProbability, Method::VerbalNumber,  Method::VerbalWord,
};

// Kebab-case names ("likelihood-min", "verbal-number", ...).
std::string_view to_string(Method method);
Method parse_method(std::string_view name);
bool is_monolingual(Method method);
bool is_likelihood(Method method);

struct ConfidenceRecord {
    std::string item_id;
    Language language = Language::En;
    Method method = Method::VerbalNumber;
    double score = 0.0;
    std::set<std::string> flags;
    // Base method for aggregates and baselines; grouping name for CrossLingual.
    std::optional<Method> base_method;
    std::optional<std::string> grouping;

    friend bool operator==(const ConfidenceRecord&, const ConfidenceRecord&) = default;
};

// Builds a record, rejecting scores outside [0,1] or NaN.
ConfidenceRecord make_record(std::string item_id, Language language, Method method,
                             double score);

enum class GroupingMode { Shared, Distinct, Mixed };

std::string_view to_string(GroupingMode mode);
GroupingMode parse_grouping_mode(std::string_view text);

struct LanguageGrouping {
    std::string name;
    GroupingMode mode = GroupingMode::Mixed;
    std::vector<Language> languages;
    Language pivot = Language::En;

    friend bool operator==(const LanguageGrouping&, const LanguageGrouping&) = default;
};

// A grouping whose declared mode has been checked against the families.
class ValidatedGrouping {
public:
    const LanguageGrouping& get() const noexcept { return grouping_; }
    const LanguageGrouping* operator->() const noexcept { return &grouping_; }

private:
    friend ValidatedGrouping validate_grouping(LanguageGrouping grouping);
    explicit ValidatedGrouping(LanguageGrouping g) : grouping_(std::move(g)) {}
    LanguageGrouping grouping_;
};

// The mode implied by the family composition relative to the pivot.
GroupingMode infer_mode(const std::vector<Language>& languages, Language pivot);

// Throws GroupingModeMismatch naming the offending language, or
// InvalidArgument for empty sets, duplicates or a pivot outside the set.
ValidatedGrouping validate_grouping(LanguageGrouping grouping);

struct EvalRecord {
    std::string item_id;
    Language language = Language::En;
    int em = 0;
    double f1 = 0.0;
    int nli_correct = 0;
    std::optional<double> confidence;
    std::size_t token_length = 0;
    std::set<std::string> flags;

    friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

}  // namespace mlconf
