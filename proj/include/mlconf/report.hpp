#pragma once

// Assembly and rendering of result tables: AUROC per (method, language),
// answer quality per language, and refinement before/after accuracy.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlconf/json_io.hpp"
#include "mlconf/refine.hpp"
#include "mlconf/types.hpp"

namespace mlconf::report {

inline constexpr const char* kEmptyCell = "—";

struct ReportInput {
    std::vector<EvalRecord> evals;  // labels for the initial answers
    std::vector<ConfidenceRecord> confidences;
    std::vector<refine::RefinementOutcome> refinements;
    std::vector<EvalRecord> refined_evals;  // labels for the final answers
    // Column order; empty means the languages of `evals` in canonical order.
    std::vector<Language> languages;
};

struct AurocRow {
    std::string method;  // method name, or "cross-lingual:<grouping>"
    std::map<Language, std::optional<double>> cells;
    std::optional<double> average;  // mean of the defined cells
};

struct QualityRow {
    Language language = Language::En;
    std::size_t items = 0;
    double em = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    double avg_length = 0.0;  // backend tokens per answer
};

struct RefinementRow {
    Language language = Language::En;
    std::size_t items = 0;
    std::size_t refined = 0;
    std::optional<double> accuracy_before;
    std::optional<double> accuracy_after;
};

struct Report {
    std::vector<Language> languages;
    // Monolingual methods. Absent without confidence records.
    std::optional<std::vector<AurocRow>> auroc;
    // Cross-lingual aggregates and the multi-output baselines.
    std::vector<AurocRow> aggregate_auroc;
    std::vector<QualityRow> quality;
    std::vector<RefinementRow> refinement;
};

// Row key of a confidence record in the AUROC matrix.
std::string row_key(const ConfidenceRecord& record);

Report build_report(const ReportInput& input);

json to_json(const Report& report);
// AUROC and accuracy values are rendered x100 with two decimals.
std::string render_table(const Report& report);
std::string auroc_csv(const Report& report);

}  // namespace mlconf::report
