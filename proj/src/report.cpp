#include "mlconf/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "mlconf/error.hpp"
#include "mlconf/eval.hpp"
#include "mlconf/text.hpp"

namespace mlconf::report {

namespace {

using Key = std::pair<std::string, Language>;

std::map<Key, int> label_index(const std::vector<EvalRecord>& evals) {
    std::map<Key, int> labels;
    for (const auto& e : evals) labels[{e.item_id, e.language}] = e.nli_correct;
    return labels;
}

int method_rank(const std::string& key) {
    for (std::size_t i = 0; i < kMonolingualMethods.size(); ++i) {
        if (key == to_string(kMonolingualMethods[i])) return static_cast<int>(i);
    }
    if (key == to_string(Method::TemperatureSampling)) return 100;
    if (key == to_string(Method::PromptPerturbation)) return 101;
    return 200;
}

std::optional<double> mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

std::string pct(const std::optional<double>& v) {
    return v ? fmt::format("{:.2f}", *v * 100.0) : std::string(kEmptyCell);
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Pads to `width` display columns, counting code points.
std::string pad(const std::string& s, std::size_t width, bool right) {
    const auto len = text::decode_utf8(s).size();
    if (len >= width) return s;
    const std::string fill(width - len, ' ');
    return right ? fill + s : s + fill;
}

std::string render_grid(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (std::size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], text::decode_utf8(row[c]).size());
        }
    }
    std::string out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::string line;
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (c) line += "  ";
            line += pad(rows[r][c], widths[c], c != 0);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < widths.size(); ++c) total += widths[c] + (c ? 2 : 0);
            out += std::string(total, '-') + "\n";
        }
    }
    return out;
}

}  // namespace

std::string row_key(const ConfidenceRecord& record) {
    if (record.method == Method::CrossLingual) {
        return "cross-lingual:" + record.grouping.value_or("?");
    }
    return std::string(to_string(record.method));
}

Report build_report(const ReportInput& input) {
    Report report;
    report.languages = input.languages;
    if (report.languages.empty()) {
        for (Language l : kAllLanguages) {
            if (std::any_of(input.evals.begin(), input.evals.end(),
                            [l](const EvalRecord& e) { return e.language == l; })) {
                report.languages.push_back(l);
            }
        }
    }

    const auto labels = label_index(input.evals);

    if (!input.confidences.empty()) {
        std::map<std::string, std::map<Language, std::vector<eval::ScoredLabel>>> grouped;
        for (const auto& c : input.confidences) {
            auto it = labels.find({c.item_id, c.language});
            auto& cell = grouped[row_key(c)][c.language];
            if (it != labels.end()) cell.push_back({c.score, it->second});
        }
        std::vector<std::string> keys;
        for (const auto& [k, _] : grouped) keys.push_back(k);
        std::stable_sort(keys.begin(), keys.end(),
                         [](const std::string& a, const std::string& b) { return method_rank(a) < method_rank(b); });
        std::vector<AurocRow> rows;
        std::set<std::string> monolingual;
        for (const auto& c : input.confidences) {
            if (is_monolingual(c.method)) monolingual.insert(row_key(c));
        }
        for (const auto& k : keys) {
            AurocRow row;
            row.method = k;
            std::vector<double> defined;
            for (Language l : report.languages) {
                std::optional<double> value;
                auto it = grouped[k].find(l);
                if (it != grouped[k].end()) {
                    try {
                        value = eval::auroc(it->second);
                    } catch (const DegenerateLabels&) {
                    }
                }
                if (value) defined.push_back(*value);
                row.cells[l] = value;
            }
            row.average = mean_of(defined);
            if (monolingual.count(k)) rows.push_back(std::move(row));
            else report.aggregate_auroc.push_back(std::move(row));
        }
        report.auroc = std::move(rows);
    }

    for (Language l : report.languages) {
        QualityRow q;
        q.language = l;
        double em = 0, f1 = 0, acc = 0, len = 0;
        for (const auto& e : input.evals) {
            if (e.language != l) continue;
            ++q.items;
            em += e.em;
            f1 += e.f1;
            acc += e.nli_correct;
            len += static_cast<double>(e.token_length);
        }
        if (q.items) {
            const double n = static_cast<double>(q.items);
            q.em = em / n;
            q.f1 = f1 / n;
            q.accuracy = acc / n;
            q.avg_length = len / n;
        }
        report.quality.push_back(q);
    }

    if (!input.refinements.empty()) {
        const auto after = label_index(input.refined_evals);
        for (Language l : report.languages) {
            RefinementRow r;
            r.language = l;
            std::vector<double> before_labels, after_labels;
            for (const auto& o : input.refinements) {
                if (o.language != l) continue;
                ++r.items;
                if (o.refined) ++r.refined;
                if (auto it = labels.find({o.item_id, l}); it != labels.end()) before_labels.push_back(it->second);
                if (auto it = after.find({o.item_id, l}); it != after.end()) after_labels.push_back(it->second);
            }
            r.accuracy_before = mean_of(before_labels);
            r.accuracy_after = mean_of(after_labels);
            report.refinement.push_back(r);
        }
    }
    return report;
}

namespace {

json rows_json(const std::vector<AurocRow>& rows, const std::vector<Language>& languages) {
    json out = json::array();
    for (const auto& row : rows) {
        json cells = json::object();
        for (Language l : languages) cells[std::string(to_code(l))] = opt_json(row.cells.at(l));
        out.push_back({{"method", row.method}, {"cells", cells}, {"average", opt_json(row.average)}});
    }
    return out;
}

std::vector<std::string> row_cells(const AurocRow& row, const std::vector<Language>& languages) {
    std::vector<std::string> line = {row.method};
    for (Language l : languages) line.push_back(pct(row.cells.at(l)));
    line.push_back(pct(row.average));
    return line;
}

}  // namespace

json to_json(const Report& report) {
    json j;
    j["languages"] = json::array();
    for (Language l : report.languages) j["languages"].push_back(std::string(to_code(l)));
    if (report.auroc) {
        j["auroc"] = rows_json(*report.auroc, report.languages);
        j["aggregate_auroc"] = rows_json(report.aggregate_auroc, report.languages);
    }
    json quality = json::array();
    for (const auto& q : report.quality) {
        quality.push_back({{"language", std::string(to_code(q.language))},
                           {"items", q.items},
                           {"em", q.em},
                           {"f1", q.f1},
                           {"accuracy", q.accuracy},
                           {"avg_length_tokens", q.avg_length}});
    }
    j["quality"] = quality;
    json refinement = json::array();
    for (const auto& r : report.refinement) {
        refinement.push_back({{"language", std::string(to_code(r.language))},
                              {"items", r.items},
                              {"refined", r.refined},
                              {"accuracy_before", opt_json(r.accuracy_before)},
                              {"accuracy_after", opt_json(r.accuracy_after)}});
    }
    j["refinement"] = refinement;
    return j;
}

std::string render_table(const Report& report) {
    std::string out;
    std::vector<std::string> header = {"Languages"};
    for (Language l : report.languages) header.emplace_back(to_code(l));
    header.emplace_back("Avg");

    std::vector<std::vector<std::string>> grid = {header};
    std::vector<std::string> length_row = {"Avg Length (tokens)"};
    for (const auto& q : report.quality) {
        length_row.push_back(q.items ? fmt::format("{:.2f}", q.avg_length) : std::string(kEmptyCell));
    }
    length_row.emplace_back("-");
    grid.push_back(length_row);
    if (report.auroc) {
        for (const auto& row : *report.auroc) grid.push_back(row_cells(row, report.languages));
    }
    out += "AUROC (x100)\n" + render_grid(grid) + "\n";
    if (!report.aggregate_auroc.empty()) {
        std::vector<std::vector<std::string>> agg = {header};
        agg.front().front() = "Aggregate";
        for (const auto& row : report.aggregate_auroc) agg.push_back(row_cells(row, report.languages));
        out += "Aggregated confidence AUROC (x100)\n" + render_grid(agg) + "\n";
    }

    std::vector<std::vector<std::string>> quality = {{"Language", "Items", "EM", "F1", "Accuracy", "Avg Length"}};
    for (const auto& q : report.quality) {
        quality.push_back({std::string(to_code(q.language)), std::to_string(q.items), fmt::format("{:.2f}", q.em * 100),
                           fmt::format("{:.2f}", q.f1 * 100), fmt::format("{:.2f}", q.accuracy * 100),
                           fmt::format("{:.2f}", q.avg_length)});
    }
    out += "Answer quality (x100)\n" + render_grid(quality);

    if (!report.refinement.empty()) {
        std::vector<std::vector<std::string>> refine = {{"Language", "Items", "Refined", "Before", "After", "Delta"}};
        for (const auto& r : report.refinement) {
            std::optional<double> delta;
            if (r.accuracy_before && r.accuracy_after) delta = *r.accuracy_after - *r.accuracy_before;
            refine.push_back({std::string(to_code(r.language)), std::to_string(r.items), std::to_string(r.refined),
                              pct(r.accuracy_before), pct(r.accuracy_after), pct(delta)});
        }
        out += "\nRefinement accuracy (x100)\n" + render_grid(refine);
    }
    return out;
}

std::string auroc_csv(const Report& report) {
    std::string out = "method";
    for (Language l : report.languages) out += "," + std::string(to_code(l));
    out += ",avg\n";
    if (!report.auroc) return out;
    auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : std::string(); };
    for (const auto& row : *report.auroc) {
        out += row.method;
        for (Language l : report.languages) out += "," + cell(row.cells.at(l));
        out += "," + cell(row.average) + "\n";
    }
    return out;
}

}  // namespace mlconf::report
