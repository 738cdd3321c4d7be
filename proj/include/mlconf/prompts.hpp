#pragma once

// Localized prompt templates keyed by (purpose, language).
//
// Template text is split into chat messages by section marker lines
// "[system]", "[user]" and "[assistant]". Placeholders are written
// {name}; unknown placeholders are left untouched.

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mlconf/backend.hpp"
#include "mlconf/types.hpp"

namespace mlconf::prompts {

enum class Purpose {
    Answer,
    TrueProbability,
    VerbalNumber,
    VerbalWord,
    Nli,
    Refine,
    Translate,
    Paraphrase,
};

inline constexpr std::array<Purpose, 8> kAllPurposes = {
    Purpose::Answer, Purpose::TrueProbability, Purpose::VerbalNumber, Purpose::VerbalWord,
    Purpose::Nli,    Purpose::Refine,          Purpose::Translate,    Purpose::Paraphrase,
};

std::string_view to_string(Purpose purpose);  // snake_case, as used in file names
Purpose parse_purpose(std::string_view name);

using Vars = std::map<std::string, std::string, std::less<>>;

std::vector<backend::Message> parse_template(std::string_view text);
std::string substitute(std::string_view text, const Vars& vars);

// Localized words for the five confidence levels, lowest first.
const std::array<std::string, 5>& default_confidence_words(Language lang);

// Localized labels for the (A) and (B) choices of the self-evaluation prompt.
struct ChoiceWords {
    std::string true_word;
    std::string false_word;
};
const ChoiceWords& default_choice_words(Language lang);

class PromptLibrary {
public:
    // The shipped defaults for every (purpose, language) pair.
    static PromptLibrary defaults();

    // Replaces templates with files named <purpose>.<lang>.txt found in dir.
    // Returns how many were loaded.
    std::size_t load_overrides(const std::filesystem::path& dir);
    // Writes every template as <purpose>.<lang>.txt.
    void export_to(const std::filesystem::path& dir) const;

    const std::string& raw(Purpose purpose, Language lang) const;
    void set(Purpose purpose, Language lang, std::string text);

    std::vector<backend::Message> render(Purpose purpose, Language lang, const Vars& vars) const;

    // Longest placeholder-free text run of the template. It appears verbatim
    // in every rendered request, so mock scripts can key on it.
    std::string signature(Purpose purpose, Language lang) const;

private:
    std::map<std::pair<Purpose, Language>, std::string> templates_;
};

}  // namespace mlconf::prompts
