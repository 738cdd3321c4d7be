#include "mlconf/dataset.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <set>

#include "mlconf/error.hpp"
#include "mlconf/eval.hpp"
#include "mlconf/text.hpp"
#include "mlconf/util.hpp"

namespace mlconf::dataset {

namespace {

json translation_json(const Translation& t) { return json{{"question", t.question}, {"answer", t.answer}}; }

Translation translation_from(const json& j) {
    return Translation{j.at("question").get<std::string>(), j.at("answer").get<std::string>()};
}

std::string translate_text(const Translator& tr, Language target, const std::string& input) {
    backend::GenerationRequest req;
    req.prompt_messages = tr.prompts.render(prompts::Purpose::Translate, target, {{"text", input}});
    req.temperature = tr.temperature;
    req.max_tokens = tr.max_tokens;
    auto out = text::trim(tr.backend.generate(req, 0).generation.text);
    if (out.empty()) throw EmptyGeneration("translator '" + tr.backend.model_id() + "' returned nothing");
    return out;
}

std::string csv_field(std::string_view s) {
    const bool quote = s.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!quote) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view s) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < s.size() && s[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < s.size() && s[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field.push_back(c);
        }
    }
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

constexpr std::array<std::string_view, 10> kReviewColumns = {
    "item_id", "target_language", "source_question", "source_answer", "translation_a_question",
    "translation_a_answer", "translation_b_question", "translation_b_answer", "agreement", "verdict",
};

}  // namespace

void to_json(json& j, const TranslationPair& p) {
    j = json{{"item_id", p.item_id},
             {"source", p.source},
             {"target", std::string(to_code(p.target))},
             {"a", translation_json(p.a)},
             {"b", translation_json(p.b)},
             {"agreement", p.agreement}};
}

void from_json(const json& j, TranslationPair& p) {
    p.item_id = j.at("item_id").get<std::string>();
    p.source = j.at("source").get<QAItem>();
    p.target = parse_language(j.at("target").get<std::string>()).code;
    p.a = translation_from(j.at("a"));
    p.b = translation_from(j.at("b"));
    p.agreement = j.at("agreement").get<double>();
}

double agreement(const Translation& a, const Translation& b, Language target) {
    const double q = eval::unigram_f1(a.question, {b.question}, target);
    const double ans = eval::unigram_f1(a.answer, {b.answer}, target);
    return (q + ans) / 2.0;
}

TranslationPair translate_item(const Translator& a, const Translator& b, const QAItem& source, Language target) {
    if (target == Language::En) throw PreconditionViolation("translation target must differ from English");
    if (source.language != Language::En) throw PreconditionViolation("translation source must be English");
    validate_item(source);
    TranslationPair p;
    p.item_id = source.item_id;
    p.source = source;
    p.target = target;
    p.a = {translate_text(a, target, source.question), translate_text(a, target, source.gold_answers.front())};
    p.b = {translate_text(b, target, source.question), translate_text(b, target, source.gold_answers.front())};
    p.agreement = agreement(p.a, p.b, target);
    return p;
}

std::vector<TranslationPair> similarity_filter(std::vector<TranslationPair> pairs, std::size_t top_n) {
    if (top_n < 1) throw PreconditionViolation("top_n must be at least 1");
    std::sort(pairs.begin(), pairs.end(), [](const TranslationPair& x, const TranslationPair& y) {
        if (x.agreement != y.agreement) return x.agreement > y.agreement;
        return x.item_id < y.item_id;
    });
    if (pairs.size() > top_n) pairs.resize(top_n);
    return pairs;
}

ParallelCorpus build_parallel_corpus(const std::map<Language, std::vector<TranslationPair>>& pairs,
                                     std::size_t top_n) {
    ParallelCorpus corpus;
    std::optional<std::set<std::string>> common;
    for (const auto& [lang, list] : pairs) {
        auto kept = similarity_filter(list, top_n);
        std::set<std::string> ids;
        for (const auto& p : kept) ids.insert(p.item_id);
        if (!common) {
            common = std::move(ids);
        } else {
            std::set<std::string> both;
            std::set_intersection(common->begin(), common->end(), ids.begin(), ids.end(),
                                  std::inserter(both, both.end()));
            common = std::move(both);
        }
        corpus.retained[lang] = std::move(kept);
    }
    if (common) corpus.item_ids.assign(common->begin(), common->end());
    for (const auto& [lang, kept] : corpus.retained) {
        auto& out = corpus.parallel[lang];
        for (const auto& p : kept) {
            if (std::binary_search(corpus.item_ids.begin(), corpus.item_ids.end(), p.item_id)) out.push_back(p);
        }
    }
    return corpus;
}

QAItem to_item(const TranslationPair& pair) {
    QAItem item;
    item.item_id = pair.item_id;
    item.language = pair.target;
    item.question = pair.a.question;
    item.gold_answers = {pair.a.answer};
    if (eval::normalize(pair.b.answer, pair.target) != eval::normalize(pair.a.answer, pair.target)) {
        item.gold_answers.push_back(pair.b.answer);
    }
    return item;
}

std::string review_sheet_csv(const std::vector<TranslationPair>& pairs, std::size_t sample_size,
                             std::uint64_t seed) {
    if (sample_size > pairs.size()) {
        throw PreconditionViolation("review sample of " + std::to_string(sample_size) + " exceeds " +
                                    std::to_string(pairs.size()) + " retained pairs");
    }
    std::vector<std::size_t> idx(pairs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    SeededRng rng(seed);
    for (std::size_t i = 0; i < sample_size; ++i) {
        const auto j = i + rng.below(idx.size() - i);
        std::swap(idx[i], idx[j]);
    }

    std::string out;
    for (std::size_t c = 0; c < kReviewColumns.size(); ++c) {
        if (c) out.push_back(',');
        out += kReviewColumns[c];
    }
    out += "\n";
    for (std::size_t i = 0; i < sample_size; ++i) {
        const auto& p = pairs[idx[i]];
        char agreement_buf[32];
        std::snprintf(agreement_buf, sizeof agreement_buf, "%.4f", p.agreement);
        const std::array<std::string, 10> fields = {
            p.item_id,      std::string(to_code(p.target)), p.source.question, p.source.gold_answers.front(),
            p.a.question,   p.a.answer,                     p.b.question,      p.b.answer,
            agreement_buf,  "",
        };
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (c) out.push_back(',');
            out += csv_field(fields[c]);
        }
        out += "\n";
    }
    return out;
}

void export_review_sheet(const std::vector<TranslationPair>& pairs, std::size_t sample_size, std::uint64_t seed,
                         const std::filesystem::path& path) {
    write_file_atomic(path, review_sheet_csv(pairs, sample_size, seed));
}

std::vector<ReviewVerdict> read_review_sheet(const std::filesystem::path& path) {
    const auto rows = parse_csv(read_file(path));
    if (rows.empty() || rows.front().size() != kReviewColumns.size() || rows.front().front() != "item_id") {
        throw MalformedLine(1, "review sheet header does not match");
    }
    std::vector<ReviewVerdict> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != kReviewColumns.size()) throw MalformedLine(r + 1, "wrong column count");
        if (text::trim(row.back()).empty()) continue;
        out.push_back({row[0], parse_language(row[1]).code, text::trim(row.back())});
    }
    return out;
}

std::vector<QAItem> parse_dataset(std::string_view contents) {
    std::vector<QAItem> items;
    std::set<std::pair<std::string, Language>> seen;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(contents)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        QAItem item;
        try {
            item = json::parse(line).get<QAItem>();
        } catch (const json::exception& e) {
            throw MalformedLine(line_no, e.what());
        } catch (const Error& e) {
            throw MalformedLine(line_no, e.what());
        }
        if (!seen.emplace(item.item_id, item.language).second) {
            throw MalformedLine(line_no, "duplicate (item_id, language) '" + item.item_id + "'");
        }
        items.push_back(std::move(item));
    }
    return items;
}

std::string serialize_dataset(const std::vector<QAItem>& items) {
    std::string out;
    for (const auto& item : items) {
        out += dump_line(json(item));
        out += "\n";
    }
    return out;
}

std::vector<QAItem> load_dataset(const std::filesystem::path& path) { return parse_dataset(read_file(path)); }

void save_dataset(const std::vector<QAItem>& items, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_dataset(items));
}

BuildResult build_dataset(const Translator& a, const Translator& b, const std::vector<QAItem>& source,
                          const BuildOptions& options) {
    BuildResult result;
    std::map<Language, std::vector<TranslationPair>> pairs;
    for (Language target : options.targets) {
        using Attempt = std::optional<TranslationPair>;
        std::vector<std::string> errors(source.size());
        const std::function<Attempt(std::size_t)> job = [&](std::size_t i) -> Attempt {
            try {
                return translate_item(a, b, source[i], target);
            } catch (const Error& e) {
                errors[i] = source[i].item_id + "/" + std::string(to_code(target)) + ": " + e.code() + ": " + e.what();
                return std::nullopt;
            }
        };
        auto attempts = parallel_map<Attempt>(source.size(), options.workers, job);
        auto& list = pairs[target];
        for (std::size_t i = 0; i < attempts.size(); ++i) {
            if (attempts[i]) {
                list.push_back(std::move(*attempts[i]));
            } else {
                spdlog::warn("skipping translation {}", errors[i]);
                result.skipped.push_back(errors[i]);
            }
        }
    }

    result.corpus = build_parallel_corpus(pairs, options.top_n);
    const std::set<std::string> keep(result.corpus.item_ids.begin(), result.corpus.item_ids.end());
    auto& en = result.items[Language::En];
    for (const auto& item : source) {
        if (options.targets.empty() || keep.count(item.item_id)) en.push_back(item);
    }
    std::vector<TranslationPair> all;
    for (const auto& [lang, list] : result.corpus.parallel) {
        auto& out = result.items[lang];
        // Keep source order so every language file lists items identically.
        std::map<std::string, const TranslationPair*> by_id;
        for (const auto& p : list) by_id[p.item_id] = &p;
        for (const auto& item : source) {
            if (auto it = by_id.find(item.item_id); it != by_id.end()) {
                out.push_back(to_item(*it->second));
                all.push_back(*it->second);
            }
        }
    }
    result.review_sheet = review_sheet_csv(all, std::min(options.review_sample, all.size()), options.seed);
    return result;
}

}  // namespace mlconf::dataset
