#include <gtest/gtest.h>

#include "mlconf/crosslingual.hpp"
#include "mlconf/error.hpp"
#include "mlconf/eval.hpp"
#include "oracles.hpp"

using namespace mlconf;
namespace xl = mlconf::crosslingual;

namespace {

std::map<Language, ConfidenceRecord> recs(const std::vector<std::pair<Language, double>>& scores,
                                          Method m = Method::VerbalNumber) {
    std::map<Language, ConfidenceRecord> out;
    for (auto [l, s] : scores) out[l] = make_record("q7", l, m, s);
    return out;
}

ValidatedGrouping grouping(std::vector<Language> langs) {
    return validate_grouping({"g", infer_mode(langs, Language::En), std::move(langs), Language::En});
}

}  // namespace

TEST(CrossLingual, MeanOfGroupingLanguages) {
    const auto r = xl::cross_lingual_confidence(recs({{Language::En, 0.8}, {Language::Fr, 0.6}}),
                                                grouping({Language::En, Language::Fr}));
    EXPECT_NEAR(r.score, 0.7, 1e-15);
    EXPECT_EQ(r.method, Method::CrossLingual);
    EXPECT_EQ(r.language, Language::En);
    EXPECT_EQ(r.base_method, Method::VerbalNumber);
    EXPECT_EQ(r.grouping, "g");
    EXPECT_EQ(r.item_id, "q7");

    const auto m = xl::cross_lingual_confidence(
        recs({{Language::En, 1.0}, {Language::Zh, 0.8}, {Language::Fr, 0.9}, {Language::Ja, 0.0}}),
        grouping({Language::En, Language::Zh, Language::Fr}));
    EXPECT_NEAR(m.score, 0.9, 1e-15);
}

TEST(CrossLingual, Errors) {
    EXPECT_THROW(xl::cross_lingual_confidence(recs({{Language::En, 0.8}, {Language::Fr, 0.6}}),
                                              grouping({Language::En, Language::Fr, Language::De})),
                 MissingLanguage);
    auto mixed = recs({{Language::En, 0.8}, {Language::Fr, 0.6}});
    mixed[Language::Fr].item_id = "q8";
    EXPECT_THROW(xl::cross_lingual_confidence(mixed, grouping({Language::En, Language::Fr})), MixedItems);
    auto methods = recs({{Language::En, 0.8}, {Language::Fr, 0.6}});
    methods[Language::Fr].method = Method::VerbalWord;
    EXPECT_THROW(xl::cross_lingual_confidence(methods, grouping({Language::En, Language::Fr})), MixedMethods);
}

TEST(CrossLingualProperty, BoundedAndOrderFree) {
    oracle::Gen g(7);
    const std::vector<Language> pool(kAllLanguages.begin(), kAllLanguages.end());
    for (int t = 0; t < 2000; ++t) {
        std::vector<Language> langs{Language::En};
        for (Language l : pool) {
            if (l != Language::En && g.coin()) langs.push_back(l);
        }
        std::vector<std::pair<Language, double>> scores;
        double lo = 1.0, hi = 0.0;
        for (Language l : langs) {
            const double s = g.uniform(0.0, 1.0);
            scores.push_back({l, s});
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        const auto r = xl::cross_lingual_confidence(recs(scores), grouping(langs));
        EXPECT_GE(r.score, lo - 1e-15);
        EXPECT_LE(r.score, hi + 1e-15);

        auto shuffled = langs;
        std::reverse(shuffled.begin() + 1, shuffled.end());
        const auto r2 = xl::cross_lingual_confidence(recs(scores), grouping(shuffled));
        EXPECT_NEAR(r.score, r2.score, 1e-12);
    }
}

TEST(StandardGroupings, AllValidateWithDeclaredModes) {
    const auto gs = xl::standard_groupings();
    ASSERT_EQ(gs.size(), 10u);
    const std::vector<std::string> names{"en",        "shared2",   "shared3",   "shared5", "distinct2",
                                         "distinct4", "distinct6", "mixed3", "mixed5",  "all"};
    for (std::size_t i = 0; i < gs.size(); ++i) {
        EXPECT_EQ(gs[i].name, names[i]);
        EXPECT_NO_THROW(validate_grouping(gs[i])) << gs[i].name;
        EXPECT_EQ(gs[i].pivot, Language::En);
    }
    EXPECT_EQ(xl::find_grouping(gs, "shared5").languages.size(), 5u);
    EXPECT_EQ(xl::find_grouping(gs, "all").languages.size(), kAllLanguages.size());
    EXPECT_THROW(xl::find_grouping(gs, "nope"), ConfigError);
}

namespace {

struct BaselineFixture : ::testing::Test {
    prompts::PromptLibrary lib = prompts::PromptLibrary::defaults();
    QAItem item{"q1", Language::En, "Which city is the capital of France?", {"Paris"}};

    std::string sig(prompts::Purpose p) const { return lib.signature(p, Language::En); }
};

}  // namespace

TEST_F(BaselineFixture, TemperatureSamplingAveragesSamples) {
    backend::MockScript s;
    s.on_contains({sig(prompts::Purpose::Answer)}, {{"Paris"}, {"Lutetia"}, {"Parigi"}});
    s.on_contains({sig(prompts::Purpose::VerbalNumber), "Paris"}, {{"0.9"}});
    s.on_contains({sig(prompts::Purpose::VerbalNumber), "Lutetia"}, {{"0.7"}});
    s.on_contains({sig(prompts::Purpose::VerbalNumber), "Parigi"}, {{"0.8"}});
    backend::Backend b(backend::mock_backend(std::move(s)));
    xl::SamplingOptions opt;
    opt.samples = 3;
    const auto r = xl::temperature_sampling_confidence({b, lib}, item, Method::VerbalNumber, opt);
    EXPECT_NEAR(r.score, 0.8, 1e-15);
    EXPECT_EQ(r.method, Method::TemperatureSampling);
    EXPECT_EQ(r.base_method, Method::VerbalNumber);

    opt.samples = 0;
    EXPECT_THROW(xl::temperature_sampling_confidence({b, lib}, item, Method::VerbalNumber, opt),
                 PreconditionViolation);
}

TEST_F(BaselineFixture, PromptPerturbationAveragesParaphrases) {
    const std::vector<std::string> paras{"France's capital city is which?", "Name the French capital.",
                                         "What is the seat of government of France?"};
    backend::MockScript s;
    s.on_contains({sig(prompts::Purpose::Answer)}, {{"Paris"}});
    s.on_contains({sig(prompts::Purpose::VerbalNumber), paras[0]}, {{"0.6"}});
    s.on_contains({sig(prompts::Purpose::VerbalNumber), paras[1]}, {{"0.6"}});
    s.on_contains({sig(prompts::Purpose::VerbalNumber), paras[2]}, {{"0.9"}});
    backend::Backend b(backend::mock_backend(std::move(s)));
    const auto r = xl::prompt_perturbation_confidence({b, lib}, item, paras, Method::VerbalNumber);
    EXPECT_NEAR(r.score, 0.7, 1e-15);
    EXPECT_EQ(r.method, Method::PromptPerturbation);
    EXPECT_THROW(xl::prompt_perturbation_confidence({b, lib}, item, {}, Method::VerbalNumber),
                 PreconditionViolation);
}

TEST_F(BaselineFixture, ParaphraseParsing) {
    backend::MockScript s;
    s.on_contains({sig(prompts::Purpose::Paraphrase)}, {{"1. First?\n\n2) Second?\n- First?\n* Third?\nFourth?"}});
    backend::Backend b(backend::mock_backend(std::move(s)));
    EXPECT_EQ(xl::generate_paraphrases({b, lib}, item, 3),
              (std::vector<std::string>{"First?", "Second?", "Third?"}));
    EXPECT_THROW(xl::generate_paraphrases({b, lib}, item, 0), PreconditionViolation);

    backend::MockScript blank;
    blank.on_contains({sig(prompts::Purpose::Paraphrase)}, {{"\n \n"}});
    backend::Backend bb(backend::mock_backend(std::move(blank)));
    EXPECT_THROW(xl::generate_paraphrases({bb, lib}, item, 3), EmptyGeneration);
}

TEST(NoisyScores, ShapeAndDeterminism) {
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) labels.push_back(i % 3 == 0);
    xl::NoiseModel model;
    model.seed = 99;
    const auto a = xl::noisy_scores(labels, {Language::En, Language::Fr}, model);
    const auto b = xl::noisy_scores(labels, {Language::Fr}, model);
    ASSERT_EQ(a.at(Language::En).size(), 100u);
    EXPECT_EQ(a.at(Language::Fr), b.at(Language::Fr));
    EXPECT_NE(a.at(Language::En)[0].score, a.at(Language::Fr)[0].score);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double s = a.at(Language::En)[i].score;
        const double c = labels[i] ? 0.7 : 0.3;
        EXPECT_LE(std::abs(s - c), 0.25 + 1e-15);
    }
    model.noise = 0.0;
    const auto flat = xl::noisy_scores(labels, {Language::De}, model);
    std::vector<eval::ScoredLabel> sl;
    for (std::size_t i = 0; i < labels.size(); ++i) sl.push_back({flat.at(Language::De)[i].score, labels[i]});
    EXPECT_EQ(eval::auroc(sl), 1.0);
    model.noise = -1;
    EXPECT_THROW(xl::noisy_scores(labels, {Language::De}, model), InvalidArgument);
}
