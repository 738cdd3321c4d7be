#include <gtest/gtest.h>

#include "mlconf/report.hpp"

using namespace mlconf;
using namespace mlconf::report;

namespace {

EvalRecord ev(std::string id, Language l, int correct, std::size_t len = 4) {
    EvalRecord e;
    e.item_id = std::move(id);
    e.language = l;
    e.nli_correct = correct;
    e.em = correct;
    e.f1 = correct ? 1.0 : 0.5;
    e.token_length = len;
    return e;
}

// Two items per language, one correct and one incorrect.
ReportInput two_by_two() {
    ReportInput in;
    for (Language l : {Language::En, Language::Fr}) {
        in.evals.push_back(ev("a", l, 1, 4));
        in.evals.push_back(ev("b", l, 0, 6));
        // verbal-number ranks perfectly; verbal-word inverts in fr.
        in.confidences.push_back(make_record("a", l, Method::VerbalNumber, 0.9));
        in.confidences.push_back(make_record("b", l, Method::VerbalNumber, 0.1));
        const bool fr = l == Language::Fr;
        in.confidences.push_back(make_record("a", l, Method::VerbalWord, fr ? 0.25 : 0.5));
        in.confidences.push_back(make_record("b", l, Method::VerbalWord, fr ? 0.75 : 0.5));
    }
    return in;
}

}  // namespace

TEST(Report, AurocCellsAndAverages) {
    const auto r = build_report(two_by_two());
    ASSERT_TRUE(r.auroc.has_value());
    ASSERT_EQ(r.auroc->size(), 2u);
    const auto& vn = (*r.auroc)[0];
    const auto& vw = (*r.auroc)[1];
    EXPECT_EQ(vn.method, "verbal-number");
    EXPECT_EQ(vw.method, "verbal-word");
    EXPECT_EQ(vn.cells.at(Language::En), 1.0);
    EXPECT_EQ(vn.cells.at(Language::Fr), 1.0);
    EXPECT_EQ(vn.average, 1.0);
    EXPECT_EQ(vw.cells.at(Language::En), 0.5);
    EXPECT_EQ(vw.cells.at(Language::Fr), 0.0);
    EXPECT_EQ(vw.average, 0.25);
    EXPECT_TRUE(r.aggregate_auroc.empty());
    EXPECT_EQ(r.languages, (std::vector<Language>{Language::En, Language::Fr}));
}

TEST(Report, QualityAndLength) {
    const auto r = build_report(two_by_two());
    ASSERT_EQ(r.quality.size(), 2u);
    EXPECT_EQ(r.quality[0].items, 2u);
    EXPECT_EQ(r.quality[0].avg_length, 5.0);
    EXPECT_EQ(r.quality[0].accuracy, 0.5);
    EXPECT_EQ(r.quality[0].f1, 0.75);
}

TEST(Report, AurocOmittedWithoutConfidences) {
    auto in = two_by_two();
    in.confidences.clear();
    const auto r = build_report(in);
    EXPECT_FALSE(r.auroc.has_value());
    const auto j = to_json(r);
    EXPECT_FALSE(j.contains("auroc"));
    EXPECT_EQ(j.at("quality").size(), 2u);
    EXPECT_EQ(auroc_csv(r), "method,en,fr,avg\n");
}

TEST(Report, DegenerateCellIsEmpty) {
    auto in = two_by_two();
    in.evals[1].nli_correct = 1;  // en now has only correct answers
    const auto r = build_report(in);
    const auto& vn = (*r.auroc)[0];
    EXPECT_FALSE(vn.cells.at(Language::En).has_value());
    EXPECT_EQ(vn.average, 1.0);
    EXPECT_NE(render_table(r).find(kEmptyCell), std::string::npos);
    EXPECT_NE(auroc_csv(r).find("verbal-number,,1.000000,1.000000"), std::string::npos);
}

TEST(Report, AggregatesGoToTheirOwnTable) {
    auto in = two_by_two();
    auto x = make_record("a", Language::En, Method::CrossLingual, 0.8);
    x.grouping = "mixed3";
    x.base_method = Method::VerbalNumber;
    auto y = make_record("b", Language::En, Method::CrossLingual, 0.3);
    y.grouping = "mixed3";
    y.base_method = Method::VerbalNumber;
    in.confidences.push_back(x);
    in.confidences.push_back(y);
    const auto r = build_report(in);
    ASSERT_EQ(r.aggregate_auroc.size(), 1u);
    EXPECT_EQ(r.aggregate_auroc[0].method, "cross-lingual:mixed3");
    EXPECT_EQ(r.aggregate_auroc[0].cells.at(Language::En), 1.0);
    EXPECT_FALSE(r.aggregate_auroc[0].cells.at(Language::Fr).has_value());
    EXPECT_EQ(r.auroc->size(), 2u);
    const auto table = render_table(r);
    EXPECT_NE(table.find("Aggregated confidence AUROC (x100)"), std::string::npos);
    EXPECT_NE(table.find("cross-lingual:mixed3"), std::string::npos);
}

TEST(Report, RefinementBeforeAfter) {
    auto in = two_by_two();
    for (Language l : {Language::En, Language::Fr}) {
        refine::RefinementOutcome a{"a", l, false, 0.5, "x", "x", 0.9, std::nullopt, {}, std::nullopt};
        refine::RefinementOutcome b{"b", l, true, 0.5, "y", "z", 0.1, std::nullopt, {}, std::nullopt};
        in.refinements.push_back(a);
        in.refinements.push_back(b);
        in.refined_evals.push_back(ev("a", l, 1));
        in.refined_evals.push_back(ev("b", l, l == Language::En ? 1 : 0));
    }
    const auto r = build_report(in);
    ASSERT_EQ(r.refinement.size(), 2u);
    EXPECT_EQ(r.refinement[0].refined, 1u);
    EXPECT_EQ(r.refinement[0].accuracy_before, 0.5);
    EXPECT_EQ(r.refinement[0].accuracy_after, 1.0);
    EXPECT_EQ(r.refinement[1].accuracy_after, 0.5);
    const auto table = render_table(r);
    EXPECT_NE(table.find("Refinement accuracy (x100)"), std::string::npos);
    EXPECT_NE(table.find("50.00"), std::string::npos);
    const auto j = to_json(r);
    EXPECT_EQ(j.at("refinement").at(0).at("accuracy_after"), 1.0);
}

TEST(Report, TableLayout) {
    const auto table = render_table(build_report(two_by_two()));
    EXPECT_EQ(table.rfind("AUROC (x100)\n", 0), 0u);
    const auto header_end = table.find('\n', 13);
    EXPECT_NE(table.substr(13, header_end - 13).find("Avg"), std::string::npos);
    const auto length_at = table.find("Avg Length (tokens)");
    EXPECT_LT(length_at, table.find("verbal-number"));
    EXPECT_LT(table.find("verbal-number"), table.find("verbal-word"));
    EXPECT_NE(table.find("100.00"), std::string::npos);
    EXPECT_NE(table.find("25.00"), std::string::npos);
    EXPECT_NE(table.find("Answer quality (x100)"), std::string::npos);
}

TEST(Report, ExplicitLanguageOrder) {
    auto in = two_by_two();
    in.languages = {Language::Fr, Language::En, Language::Zh};
    const auto r = build_report(in);
    EXPECT_EQ(r.languages, in.languages);
    EXPECT_EQ(r.quality[2].items, 0u);
    EXPECT_FALSE((*r.auroc)[0].cells.at(Language::Zh).has_value());
    EXPECT_EQ(auroc_csv(r).substr(0, auroc_csv(r).find('\n')), "method,fr,en,zh,avg");
}
