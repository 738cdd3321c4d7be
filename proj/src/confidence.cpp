#include "mlconf/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "mlconf/error.hpp"
#include "mlconf/text.hpp"

namespace mlconf::confidence {

namespace {

void require_probs(const Generation& gen) {
    if (!gen.probs_available) throw ProbsUnavailable("generation carries no token probabilities");
    if (gen.tokens.empty()) throw EmptyGeneration("generation has no tokens");
}

backend::GenerationRequest elicitation_request(const Elicitation& ctx, prompts::Purpose purpose,
                                               Language lang, const prompts::Vars& vars) {
    backend::GenerationRequest req;
    req.prompt_messages = ctx.prompts.render(purpose, lang, vars);
    req.temperature = ctx.temperature;
    req.max_tokens = ctx.max_tokens;
    return req;
}

bool latin_word_char(char32_t cp) {
    return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') || (cp >= U'0' && cp <= U'9') ||
           (cp >= 0xC0 && cp < 0x250 && cp != 0xD7 && cp != 0xF7);
}

bool starts_latin(std::u32string_view w) { return !w.empty() && latin_word_char(w.front()); }
bool ends_latin(std::u32string_view w) { return !w.empty() && latin_word_char(w.back()); }

std::string normalize_choice(std::string_view token) {
    std::string out;
    for (char32_t cp : text::decode_utf8(token)) {
        if (text::is_space(cp) || cp == U'(' || cp == U')' || cp == U'.' || cp == U':') continue;
        text::append_utf8(out, text::to_lower(cp));
    }
    return out;
}

}  // namespace

VerbalWordScale VerbalWordScale::for_language(Language lang) {
    VerbalWordScale s;
    s.words = prompts::default_confidence_words(lang);
    return s;
}

void VerbalWordScale::validate() const {
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) throw InvalidArgument("scale score outside [0,1]");
        if (i > 0 && !(scores[i] > scores[i - 1])) throw InvalidArgument("scale scores not increasing");
        if (text::trim(words[i]).empty()) throw InvalidArgument("empty scale word");
        for (std::size_t j = 0; j < i; ++j) {
            if (text::lowercase(words[i]) == text::lowercase(words[j])) {
                throw InvalidArgument("duplicate scale word");
            }
        }
    }
}

std::string VerbalWordScale::joined(std::string_view separator) const {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += separator;
        out += words[i];
    }
    return out;
}

// The exact means lie in [min, max] and the geometric mean below the
// arithmetic one; clamping rounded results into those bounds keeps the
// ordering min <= norm <= avg exact in floating point.
double likelihood_norm(const Generation& gen) {
    require_probs(gen);
    double log_sum = 0.0;
    for (const auto& t : gen.tokens) log_sum += std::log(t.prob);
    const double g = std::exp(log_sum / static_cast<double>(gen.tokens.size()));
    return std::clamp(g, likelihood_min(gen), likelihood_avg(gen));
}

double likelihood_avg(const Generation& gen) {
    require_probs(gen);
    double sum = 0.0;
    double hi = 0.0;
    for (const auto& t : gen.tokens) {
        sum += t.prob;
        hi = std::max(hi, t.prob);
    }
    return std::clamp(sum / static_cast<double>(gen.tokens.size()), likelihood_min(gen), hi);
}

double likelihood_min(const Generation& gen) {
    require_probs(gen);
    double m = 1.0;
    for (const auto& t : gen.tokens) m = std::min(m, t.prob);
    return m;
}

std::optional<double> parse_verbal_number(std::string_view reply) {
    static const std::regex number(R"((\d+(?:[.,]\d+)?|[.,]\d+)\s*(%|％|percent\b|per cent\b)?)",
                                   std::regex::icase);
    const std::string s(reply);
    std::smatch m;
    if (!std::regex_search(s, m, number)) return std::nullopt;
    std::string digits = m[1].str();
    std::replace(digits.begin(), digits.end(), ',', '.');
    double value = std::stod(digits.front() == '.' ? "0" + digits : digits);
    if (m[2].matched) value /= 100.0;
    return std::clamp(value, 0.0, 1.0);
}

std::optional<double> match_verbal_word(std::string_view reply, const VerbalWordScale& scale) {
    const auto hay = text::decode_utf8(text::lowercase(reply));
    const auto english = VerbalWordScale::for_language(Language::En);

    std::optional<double> best;
    std::size_t best_pos = hay.size() + 1;
    std::size_t best_len = 0;
    const auto consider = [&](const std::string& word, double score) {
        const auto needle = text::decode_utf8(text::lowercase(word));
        if (needle.empty()) return;
        for (auto pos = hay.find(needle); pos != std::u32string::npos; pos = hay.find(needle, pos + 1)) {
            const auto end = pos + needle.size();
            const bool left_ok = !starts_latin(needle) || pos == 0 || !latin_word_char(hay[pos - 1]);
            const bool right_ok = !ends_latin(needle) || end == hay.size() || !latin_word_char(hay[end]);
            if (!left_ok || !right_ok) continue;
            if (pos < best_pos || (pos == best_pos && needle.size() > best_len)) {
                best_pos = pos;
                best_len = needle.size();
                best = score;
            }
            return;
        }
    };
    for (std::size_t i = 0; i < scale.words.size(); ++i) consider(scale.words[i], scale.scores[i]);
    for (std::size_t i = 0; i < english.words.size(); ++i) consider(english.words[i], scale.scores[i]);
    return best;
}

double true_probability_from(const Generation& reply, Language lang) {
    if (!reply.probs_available) throw ProbsUnavailable("self-evaluation reply has no token probabilities");
    const auto& choice = prompts::default_choice_words(lang);
    const std::set<std::string> true_forms{"a", "true", normalize_choice(choice.true_word)};
    const std::set<std::string> false_forms{"b", "false", normalize_choice(choice.false_word)};

    for (const auto& tok : reply.tokens) {
        // Candidates at this position: the alternatives plus the emitted token.
        std::vector<TokenAlternative> cands = tok.alternatives;
        const bool emitted_listed = std::any_of(cands.begin(), cands.end(),
                                                [&](const TokenAlternative& a) { return a.text == tok.text; });
        if (!emitted_listed) cands.push_back({tok.text, tok.prob});

        double p_true = 0.0;
        double p_false = 0.0;
        bool saw_true = false;
        bool saw_false = false;
        for (const auto& c : cands) {
            const auto form = normalize_choice(c.text);
            if (form.empty()) continue;
            if (true_forms.count(form)) {
                p_true += c.prob;
                saw_true = true;
            } else if (false_forms.count(form)) {
                p_false += c.prob;
                saw_false = true;
            }
        }
        if (!saw_true && !saw_false) continue;
        if (saw_true && saw_false) return std::clamp(p_true / (p_true + p_false), 0.0, 1.0);
        return std::clamp(p_true, 0.0, 1.0);
    }
    throw DecisionTokenMissing("neither choice token appears in the self-evaluation reply");
}

Score true_probability(const Elicitation& ctx, const QAItem& item, const std::string& answer) {
    if (ctx.top_alternatives < 2) {
        throw PreconditionViolation("true probability needs at least 2 alternatives per position");
    }
    auto req = elicitation_request(ctx, prompts::Purpose::TrueProbability, item.language,
                                   {{"question", item.question}, {"answer", answer}});
    req.want_token_probs = true;
    req.top_alternatives = ctx.top_alternatives;
    const auto res = ctx.backend.generate(req, 0);
    return Score{true_probability_from(res.generation, item.language), {}};
}

Score verbal_number(const Elicitation& ctx, const QAItem& item, const std::string& answer) {
    const auto req = elicitation_request(ctx, prompts::Purpose::VerbalNumber, item.language,
                                         {{"question", item.question}, {"answer", answer}});
    for (int attempt = 0; attempt < kElicitationAttempts; ++attempt) {
        const auto res = ctx.backend.generate(req, attempt);
        if (auto v = parse_verbal_number(res.generation.text)) return Score{*v, {}};
    }
    return Score{kParseFallbackScore, {kParseFallbackFlag}};
}

Score verbal_word(const Elicitation& ctx, const QAItem& item, const std::string& answer,
                  const VerbalWordScale& scale) {
    scale.validate();
    const auto req = elicitation_request(
        ctx, prompts::Purpose::VerbalWord, item.language,
        {{"question", item.question}, {"answer", answer}, {"words", scale.joined()}});
    for (int attempt = 0; attempt < kElicitationAttempts; ++attempt) {
        const auto res = ctx.backend.generate(req, attempt);
        if (auto v = match_verbal_word(res.generation.text, scale)) return Score{*v, {}};
    }
    return Score{kParseFallbackScore, {kParseFallbackFlag}};
}

backend::GenerationRequest answer_request(const prompts::PromptLibrary& prompts, const QAItem& item,
                                          double temperature, int max_tokens) {
    backend::GenerationRequest req;
    req.prompt_messages = prompts.render(prompts::Purpose::Answer, item.language, {{"question", item.question}});
    req.temperature = temperature;
    req.max_tokens = max_tokens;
    req.want_token_probs = true;
    return req;
}

ConfidenceRecord estimate(Method method, const Elicitation& ctx, const QAItem& item, const Generation& gen) {
    if (!is_monolingual(method)) {
        throw PreconditionViolation(std::string(to_string(method)) + " is not a monolingual method");
    }
    Score s;
    switch (method) {
        case Method::LikelihoodMin: s.value = likelihood_min(gen); break;
        case Method::LikelihoodAvg: s.value = likelihood_avg(gen); break;
        case Method::LikelihoodNorm: s.value = likelihood_norm(gen); break;
        case Method::TrueProbability: s = true_probability(ctx, item, answer_text(gen)); break;
        case Method::VerbalNumber: s = verbal_number(ctx, item, answer_text(gen)); break;
        case Method::VerbalWord:
            s = verbal_word(ctx, item, answer_text(gen), VerbalWordScale::for_language(item.language));
            break;
        default: break;
    }
    auto rec = make_record(item.item_id, item.language, method, s.value);
    rec.flags = std::move(s.flags);
    return rec;
}

}  // namespace mlconf::confidence
