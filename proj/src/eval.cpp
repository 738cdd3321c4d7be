#include "mlconf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mlconf/error.hpp"
#include "mlconf/text.hpp"

namespace mlconf::eval {

std::string normalize(std::string_view input, Language lang) {
    std::u32string cleaned;
    for (char32_t cp : text::decode_utf8(input)) {
        if (text::is_punctuation(cp) || text::is_space(cp)) {
            cleaned.push_back(U' ');
        } else {
            cleaned.push_back(text::to_lower(cp));
        }
    }
    std::vector<std::u32string> words;
    std::u32string cur;
    for (char32_t cp : cleaned) {
        if (cp == U' ') {
            if (!cur.empty()) words.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(cp);
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));

    std::string out;
    for (const auto& w : words) {
        if (lang == Language::En && (w == U"a" || w == U"an" || w == U"the")) continue;
        if (!out.empty()) out.push_back(' ');
        out += text::encode_utf8(w);
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view input, Language lang) {
    std::vector<std::string> out;
    const auto cps = text::decode_utf8(input);
    if (uses_character_tokens(lang)) {
        for (char32_t cp : cps) {
            if (text::is_space(cp)) continue;
            std::string s;
            text::append_utf8(s, cp);
            out.push_back(std::move(s));
        }
        return out;
    }
    std::string cur;
    for (char32_t cp : cps) {
        if (text::is_space(cp)) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            text::append_utf8(cur, cp);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

int exact_match(std::string_view pred, const std::vector<std::string>& golds, Language lang) {
    if (golds.empty()) throw PreconditionViolation("exact_match needs at least one gold answer");
    const auto p = normalize(pred, lang);
    for (const auto& g : golds) {
        if (normalize(g, lang) == p) return 1;
    }
    return 0;
}

namespace {

double f1_single(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    // Two answers that both normalize to nothing are identical, which keeps
    // exact match implying F1 = 1.
    if (pred.empty() && gold.empty()) return 1.0;
    if (pred.empty() || gold.empty()) return 0.0;
    std::map<std::string, int> counts;
    for (const auto& t : gold) ++counts[t];
    int overlap = 0;
    for (const auto& t : pred) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double unigram_f1(std::string_view pred, const std::vector<std::string>& golds, Language lang) {
    if (golds.empty()) throw PreconditionViolation("unigram_f1 needs at least one gold answer");
    const auto p = tokenize(normalize(pred, lang), lang);
    double best = 0.0;
    for (const auto& g : golds) best = std::max(best, f1_single(p, tokenize(normalize(g, lang), lang)));
    return best;
}

std::optional<Verdict> parse_verdict(std::string_view reply) {
    const auto lowered = text::lowercase(reply);
    static const std::array<std::pair<std::string_view, Verdict>, 3> labels = {{
        {"entailment", Verdict::Entailment},
        {"neutral", Verdict::Neutral},
        {"contradiction", Verdict::Contradiction},
    }};
    std::optional<Verdict> best;
    std::size_t best_pos = std::string::npos;
    for (const auto& [word, verdict] : labels) {
        const auto pos = lowered.find(word);
        if (pos != std::string::npos && pos < best_pos) {
            best_pos = pos;
            best = verdict;
        }
    }
    return best;
}

Judgement nli_accuracy(const Judge& judge, const QAItem& item, const std::string& pred) {
    backend::GenerationRequest req;
    req.prompt_messages = judge.prompts.render(
        prompts::Purpose::Nli, item.language,
        {{"question", item.question}, {"gold", item.gold_answers.front()}, {"prediction", pred}});
    req.temperature = judge.temperature;
    req.max_tokens = judge.max_tokens;
    for (int attempt = 0; attempt < kJudgeAttempts; ++attempt) {
        const auto res = judge.backend.generate(req, attempt);
        if (auto v = parse_verdict(res.generation.text)) {
            return Judgement{*v == Verdict::Entailment ? 1 : 0, v, {}};
        }
    }
    return Judgement{0, std::nullopt, {kJudgeFallbackFlag}};
}

double auroc(std::span<const ScoredLabel> records) {
    std::size_t positives = 0;
    for (const auto& r : records) {
        if (r.label != 0 && r.label != 1) throw InvalidArgument("AUROC labels must be 0 or 1");
        if (std::isnan(r.score)) throw InvalidArgument("AUROC score is NaN");
        positives += static_cast<std::size_t>(r.label);
    }
    const std::size_t negatives = records.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw DegenerateLabels("AUROC needs at least one positive and one negative label");
    }
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return records[a].score < records[b].score; });

    // Sum of (1-based, tie-averaged) ranks of the positives, doubled to stay
    // in integers until the final division.
    std::uint64_t twice_rank_sum = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && records[order[j + 1]].score == records[order[i]].score) ++j;
        const std::uint64_t twice_avg_rank = (i + 1) + (j + 1);
        for (std::size_t k = i; k <= j; ++k) {
            if (records[order[k]].label == 1) twice_rank_sum += twice_avg_rank;
        }
        i = j + 1;
    }
    const std::uint64_t p = positives;
    const std::uint64_t twice_u = twice_rank_sum - p * (p + 1);
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(p) * static_cast<double>(negatives));
}

EvalRecord evaluate_answer(const Judge& judge, const QAItem& item, const std::string& pred,
                           std::size_t token_length) {
    EvalRecord rec;
    rec.item_id = item.item_id;
    rec.language = item.language;
    rec.em = exact_match(pred, item.gold_answers, item.language);
    rec.f1 = unigram_f1(pred, item.gold_answers, item.language);
    auto j = nli_accuracy(judge, item, pred);
    rec.nli_correct = j.correct;
    rec.flags = std::move(j.flags);
    rec.token_length = token_length;
    return rec;
}

}  // namespace mlconf::eval
