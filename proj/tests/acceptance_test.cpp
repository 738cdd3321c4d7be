// Acceptance checks 1-8. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "mlconf/confidence.hpp"
#include "mlconf/crosslingual.hpp"
#include "mlconf/dataset.hpp"
#include "mlconf/error.hpp"
#include "mlconf/eval.hpp"
#include "mlconf/refine.hpp"
#include "mlconf/util.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mlconf;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failed expectations for one criterion.
struct Check {
    std::vector<std::string> failures;
    std::string detail;

    void expect(bool ok, const std::string& what) {
        if (!ok && failures.size() < 5) failures.push_back(what);
        if (!ok && failures.size() == 5) failures.push_back("...");
    }
    bool ok() const { return failures.empty(); }
};

Generation with_probs(const std::vector<double>& probs) {
    Generation g;
    g.probs_available = true;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        g.tokens.push_back({"t" + std::to_string(i), probs[i], {}});
        g.text += g.tokens.back().text;
    }
    return g;
}

std::vector<eval::ScoredLabel> zip(const std::vector<double>& s, const std::vector<int>& l) {
    std::vector<eval::ScoredLabel> out;
    for (std::size_t i = 0; i < s.size(); ++i) out.push_back({s[i], l[i]});
    return out;
}

void auroc_oracle(Check& c) {
    oracle::Gen g(1001);
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t tied = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 2 + g.index(199);
        const auto scores = g.scores_with_ties(n);
        const auto labels = g.labels(n);
        if (std::set<double>(scores.begin(), scores.end()).size() < n) ++tied;
        const double got = eval::auroc(zip(scores, labels));
        const double want = oracle::pairwise_auroc(scores, labels);
        worst = std::max(worst, std::abs(got - want));
        c.expect(std::abs(got - want) <= 1e-12, fmt::format("instance {} n={} got {} want {}", t, n, got, want));
    }
    const double secs = seconds_since(t0);
    c.expect(tied > 500, fmt::format("only {} instances had ties", tied));
    c.expect(secs < 5.0, fmt::format("runtime {:.3f}s", secs));
    c.detail = fmt::format("1000 instances, {} with ties, max |diff| {:.2e}, {:.3f}s", tied, worst, secs);
}

void likelihood_ordering(Check& c) {
    oracle::Gen g(2002);
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t compared = 0;
    for (int t = 0; t < 10000; ++t) {
        const std::size_t n = 1 + g.index(50);
        std::vector<double> p;
        const int shape = static_cast<int>(g.index(4));
        const double lo = shape == 0 ? 1e-6 : 0.01;
        const double flat = g.uniform(lo, 1.0);
        for (std::size_t k = 0; k < n; ++k) {
            if (shape == 3) p.push_back(flat);
            else if (shape == 2 && g.coin(0.3)) p.push_back(1.0);
            else p.push_back(g.uniform(lo, 1.0));
        }
        const auto gen = with_probs(p);
        const double mn = confidence::likelihood_min(gen);
        const double nm = confidence::likelihood_norm(gen);
        const double av = confidence::likelihood_avg(gen);
        c.expect(mn <= nm && nm <= av, fmt::format("vector {}: min {} norm {} avg {}", t, mn, nm, av));
        if (*std::min_element(p.begin(), p.end()) >= 0.01) {
            const double direct = oracle::direct_geometric_mean(p);
            worst = std::max(worst, std::abs(nm - direct));
            ++compared;
            c.expect(std::abs(nm - direct) <= 1e-9, fmt::format("vector {}: log {} direct {}", t, nm, direct));
        }
    }
    const double secs = seconds_since(t0);
    c.expect(secs < 5.0, fmt::format("runtime {:.3f}s", secs));
    c.detail = fmt::format("10000 vectors, {} compared to the direct product, max |diff| {:.2e}, {:.3f}s",
                           compared, worst, secs);
}

void perfect_separation(Check& c) {
    const auto lib = prompts::PromptLibrary::defaults();
    const auto sig = [&](prompts::Purpose p) { return lib.signature(p, Language::En); };
    backend::MockScript s;
    std::vector<QAItem> items;
    std::vector<int> truth;
    SeededRng rng(3003);
    for (int i = 0; i < 100; ++i) {
        const auto id = fmt::format("p{:03d}", i);
        items.push_back({id, Language::En, "Fixture question " + id + "?", {"gold-" + id}});
        const bool right = rng.uniform01() < 0.6;
        truth.push_back(right);
        const auto answer = right ? "gold-" + id : "miss-" + id;
        s.on_contains({sig(prompts::Purpose::Answer), items.back().question}, {{answer}});
        s.on_contains({sig(prompts::Purpose::VerbalNumber), items.back().question}, {{right ? "0.9" : "0.1"}});
        s.on_contains({sig(prompts::Purpose::Nli), items.back().question}, {{right ? "Entailment" : "Contradiction"}});
    }
    backend::Backend b(backend::mock_backend(std::move(s)));
    const confidence::Elicitation ctx{b, lib};
    const eval::Judge judge{b, lib};
    std::vector<eval::ScoredLabel> scored;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto gen = b.generate(confidence::answer_request(lib, items[i]), 0).generation;
        const auto answer = answer_text(gen);
        const auto rec = confidence::estimate(Method::VerbalNumber, ctx, items[i], gen);
        const auto label = eval::nli_accuracy(judge, items[i], answer).correct;
        c.expect(label == truth[i], "judge label differs from fixture for " + items[i].item_id);
        scored.push_back({rec.score, label});
    }
    const double a = eval::auroc(scored);
    c.expect(a == 1.0, fmt::format("auroc {:.17g}", a));
    const auto positives = std::count(truth.begin(), truth.end(), 1);
    c.detail = fmt::format("100 items ({} correct), auroc = {:.17g}", positives, a);
}

void crosslingual_direction(Check& c) {
    constexpr std::uint64_t kSeed = 20240611;
    std::vector<int> labels;
    SeededRng rng(kSeed);
    for (int i = 0; i < 200; ++i) labels.push_back(rng.uniform01() < 0.5);
    if (std::count(labels.begin(), labels.end(), 1) == 0) labels[0] = 1;
    const auto grouping = crosslingual::find_grouping(crosslingual::standard_groupings(), "shared5");
    const auto valid = validate_grouping(grouping);
    crosslingual::NoiseModel model;
    model.seed = kSeed;
    const auto scores = crosslingual::noisy_scores(labels, grouping.languages, model);

    std::vector<double> mean_scores;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::map<Language, ConfidenceRecord> per;
        for (Language l : grouping.languages) per[l] = scores.at(l)[i];
        mean_scores.push_back(crosslingual::cross_lingual_confidence(per, valid).score);
    }
    const double mean_auroc = eval::auroc(zip(mean_scores, labels));
    c.expect(std::abs(mean_auroc - oracle::pairwise_auroc(mean_scores, labels)) <= 1e-12, "mean auroc vs oracle");
    std::string singles;
    for (Language l : grouping.languages) {
        std::vector<double> s;
        for (const auto& r : scores.at(l)) s.push_back(r.score);
        const double a = eval::auroc(zip(s, labels));
        const double o = oracle::pairwise_auroc(s, labels);
        c.expect(std::abs(a - o) <= 1e-12, fmt::format("{} auroc {} oracle {}", to_code(l), a, o));
        c.expect(mean_auroc > a, fmt::format("mean {} not above {} {}", mean_auroc, to_code(l), a));
        singles += fmt::format("{}{}={:.4f}", singles.empty() ? "" : " ", to_code(l), a);
    }
    c.detail = fmt::format("seed {}, mean {:.4f} vs {}", kSeed, mean_auroc, singles);
}

void refinement_thresholds(Check& c) {
    const std::vector<double> confs{0.2, 0.4, 0.6, 0.8};
    const std::vector<std::pair<double, std::size_t>> sweep{{0.25, 1}, {0.50, 2}, {0.75, 3}, {1.00, 4}, {0.8, 4}};
    std::string counts;
    for (auto [k, want] : sweep) {
        std::size_t got = 0;
        for (std::size_t i = 0; i < confs.size(); ++i) {
            got += refine::decide_refine(confs[i], refine::FeedbackPolicy::fixed(k), i).refine;
        }
        c.expect(got == want, fmt::format("k={} refined {} want {}", k, got, want));
        counts += fmt::format("{}{}", counts.empty() ? "" : ",", got);
    }
    for (double conf : confs) {
        c.expect(refine::decide_refine(conf, refine::FeedbackPolicy::fixed(conf), 0).refine,
                 fmt::format("conf {} not refined at k = conf", conf));
    }

    // The run_refinement driver must agree with the decisions above.
    const auto lib = prompts::PromptLibrary::defaults();
    backend::MockScript s;
    s.with_default({"revised"});
    backend::Backend b(backend::mock_backend(std::move(s)));
    std::vector<refine::RefinementInput> inputs;
    for (std::size_t i = 0; i < confs.size(); ++i) {
        inputs.push_back({QAItem{"k" + std::to_string(i), Language::En, "q" + std::to_string(i), {"g"}}, "first",
                          confs[i], std::nullopt});
    }
    std::vector<double> ks;
    for (int i = 0; i <= 100; ++i) ks.push_back(i / 100.0);
    std::set<std::string> previous;
    for (double k : ks) {
        std::set<std::string> refined;
        for (const auto& o : refine::run_refinement({b, lib}, inputs, refine::FeedbackPolicy::fixed(k))) {
            if (o.refined) refined.insert(o.item_id);
        }
        c.expect(std::includes(refined.begin(), refined.end(), previous.begin(), previous.end()),
                 fmt::format("refined set at k={} lost items", k));
        previous = std::move(refined);
    }

    const auto policy = refine::FeedbackPolicy::random(5005);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < 10000; ++i) hits += refine::decide_refine(0.5, policy, i).refine;
    const double frac = static_cast<double>(hits) / 10000.0;
    c.expect(frac >= 0.48 && frac <= 0.52, fmt::format("random fraction {}", frac));
    c.detail = fmt::format("counts {} at k=0.25,0.5,0.75,1,0.8; random-policy fraction {:.4f}", counts, frac);
}

void metric_spots(Check& c) {
    const double f1 = eval::unigram_f1("a b c", {"a b"}, Language::De);
    c.expect(f1 == 0.8, fmt::format("f1 {:.17g}", f1));
    c.expect(oracle::whitespace_f1("a b c", "a b") == 0.8, "oracle f1");
    c.expect(eval::exact_match("The Eiffel Tower", {"Eiffel Tower"}, Language::En) == 1, "Eiffel EM");

    oracle::Gen g(6006);
    std::size_t em_hits = 0;
    const std::vector<Language> langs{Language::En, Language::Fr, Language::De, Language::Zh};
    for (int t = 0; t < 1000; ++t) {
        const Language l = langs[g.index(langs.size())];
        std::vector<std::string> golds;
        const std::size_t k = 1 + g.index(4);
        for (std::size_t i = 0; i < k; ++i) golds.push_back(g.phrase(4));
        std::string pred;
        if (g.coin(0.6)) {
            pred = golds[g.index(k)];
            if (g.coin()) pred = (l == Language::En ? "The " : "") + pred + "!";
            if (g.coin()) std::transform(pred.begin(), pred.end(), pred.begin(), ::toupper);
            if (g.coin()) pred = "  " + pred + " ";
        } else {
            pred = g.phrase(4);
        }
        const int em = eval::exact_match(pred, golds, l);
        const double f = eval::unigram_f1(pred, golds, l);
        em_hits += em;
        if (em == 1) c.expect(f == 1.0, fmt::format("EM=1 but F1={} for '{}'", f, pred));
    }
    c.expect(em_hits >= 300, fmt::format("only {} EM=1 fixtures", em_hits));
    c.detail = fmt::format("f1 = {:.17g}, Eiffel EM = 1, EM=>F1 held on {} of 1000 fixtures with EM=1", f1,
                           em_hits);
}

struct DatasetRun {
    std::map<std::string, std::string> files;
    dataset::BuildResult result;
};

DatasetRun run_dataset(const std::vector<QAItem>& source, std::size_t workers) {
    backend::Backend ta(backend::mock_backend(testsupport::synthetic_translator(false), "ta"));
    backend::Backend tb(backend::mock_backend(testsupport::synthetic_translator(true), "tb"));
    const auto lib = prompts::PromptLibrary::defaults();
    dataset::BuildOptions opt;
    opt.targets = {Language::Fr, Language::De, Language::Zh};
    opt.top_n = 50;
    opt.review_sample = 50;
    opt.seed = 7007;
    opt.workers = workers;
    DatasetRun run;
    run.result = dataset::build_dataset({ta, lib}, {tb, lib}, source, opt);
    testsupport::TempDir dir("accept-ds");
    for (const auto& [lang, items] : run.result.items) {
        dataset::save_dataset(items, dir / (std::string(to_code(lang)) + ".jsonl"));
    }
    for (const auto& [lang, pairs] : run.result.corpus.parallel) {
        std::string lines;
        for (const auto& p : pairs) lines += dump_line(json(p)) + "\n";
        write_file_atomic(dir / ("pairs." + std::string(to_code(lang)) + ".jsonl"), lines);
    }
    write_file_atomic(dir / "review_sheet.csv", run.result.review_sheet);
    for (const auto& e : fs::directory_iterator(dir.path())) {
        run.files[e.path().filename().string()] = read_file(e.path());
    }
    return run;
}

void dataset_determinism(Check& c) {
    oracle::Gen g(7007);
    std::vector<QAItem> source;
    for (int i = 0; i < 200; ++i) {
        const auto id = fmt::format("syn{:03d}", i);
        source.push_back({id, Language::En, g.phrase(10) + " " + id + "?", {g.phrase(3)}});
    }
    const auto first = run_dataset(source, 1);
    const auto second = run_dataset(source, 4);
    c.expect(first.files.size() == 8, fmt::format("{} artifacts", first.files.size()));
    c.expect(first.files == second.files, "artifacts differ between runs");
    c.expect(first.result.skipped.empty(), "translations skipped");

    // Recompute every pair to compare retained against discarded agreement.
    backend::Backend ta(backend::mock_backend(testsupport::synthetic_translator(false), "ta"));
    backend::Backend tb(backend::mock_backend(testsupport::synthetic_translator(true), "tb"));
    const auto lib = prompts::PromptLibrary::defaults();
    std::map<Language, std::vector<dataset::TranslationPair>> all;
    for (Language l : {Language::Fr, Language::De, Language::Zh}) {
        for (const auto& item : source) all[l].push_back(dataset::translate_item({ta, lib}, {tb, lib}, item, l));
    }
    const auto& corpus = first.result.corpus;
    std::string spread;
    for (const auto& [lang, pairs] : all) {
        const auto& kept = corpus.retained.at(lang);
        c.expect(kept.size() == 50, fmt::format("{} retained {}", to_code(lang), kept.size()));
        std::set<std::string> kept_ids;
        double min_kept = 1.0;
        for (const auto& p : kept) {
            kept_ids.insert(p.item_id);
            min_kept = std::min(min_kept, p.agreement);
        }
        double max_dropped = 0.0;
        for (const auto& p : pairs) {
            if (!kept_ids.count(p.item_id)) max_dropped = std::max(max_dropped, p.agreement);
        }
        c.expect(min_kept >= max_dropped,
                 fmt::format("{}: retained min {} < discarded max {}", to_code(lang), min_kept, max_dropped));
        spread += fmt::format("{}{} {:.3f}>={:.3f}", spread.empty() ? "" : ", ", to_code(lang), min_kept, max_dropped);
    }

    // Parallel corpus: exactly the ids retained in every language, listed
    // identically in every language file.
    std::set<std::string> in_all;
    for (const auto& item : source) {
        bool everywhere = true;
        for (const auto& [lang, kept] : corpus.retained) {
            everywhere = everywhere && std::any_of(kept.begin(), kept.end(), [&](const auto& p) {
                             return p.item_id == item.item_id;
                         });
        }
        if (everywhere) in_all.insert(item.item_id);
    }
    c.expect(std::vector<std::string>(in_all.begin(), in_all.end()) == corpus.item_ids, "parallel ids");
    const auto& en = first.result.items.at(Language::En);
    for (const auto& [lang, items] : first.result.items) {
        c.expect(items.size() == corpus.item_ids.size(), fmt::format("{} has {} items", to_code(lang), items.size()));
        for (std::size_t i = 0; i < std::min(items.size(), en.size()); ++i) {
            c.expect(items[i].item_id == en[i].item_id, fmt::format("{} row {} misaligned", to_code(lang), i));
        }
    }
    const auto& sheet = first.result.review_sheet;
    const auto rows = std::count(sheet.begin(), sheet.end(), '\n') - 1;
    c.detail = fmt::format("200 items x 3 languages, {} parallel items, review rows {}, agreement {}",
                           corpus.item_ids.size(), rows, spread);
}

struct Process {
    int rc = -1;
    std::string out;
};

Process shell(const std::string& cmd) {
    Process p;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) return p;
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) p.out.append(buf, n);
    const int status = ::pclose(pipe);
    p.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return p;
}

void end_to_end(Check& c) {
    testsupport::TempDir dir("accept-e2e");
    const auto work = dir / "work";
    const auto t0 = Clock::now();
    const auto p = shell(fmt::format("{} run-all -c {}/config.json --work-dir {} 2>{}", MLCONF_CLI,
                                     MLCONF_FIXTURE_DIR, work.string(), (dir / "stderr.txt").string()));
    const double secs = seconds_since(t0);
    c.expect(p.rc == 0, fmt::format("exit {}: {}", p.rc, read_file(dir / "stderr.txt").substr(0, 300)));
    c.expect(secs < 60.0, fmt::format("runtime {:.1f}s", secs));
    if (p.rc != 0) return;

    const auto report = json::parse(read_file(work / "report.json"));
    const std::vector<std::string> langs{"en", "fr", "zh"};
    c.expect(report.at("languages") == json(langs), "report languages");
    std::vector<std::string> methods;
    for (const auto& row : report.at("auroc")) {
        methods.push_back(row.at("method").get<std::string>());
        for (const auto& l : langs) {
            c.expect(row.at("cells").at(l).is_number(), row.at("method").get<std::string>() + "/" + l + " empty");
        }
        c.expect(row.at("average").is_number(), "average missing");
    }
    std::vector<std::string> want;
    for (Method m : kMonolingualMethods) want.emplace_back(to_string(m));
    c.expect(methods == want, "auroc rows are not the six monolingual methods");
    std::size_t refine_rows = 0;
    for (const auto& row : report.at("refinement")) {
        ++refine_rows;
        c.expect(row.at("accuracy_before").is_number() && row.at("accuracy_after").is_number(),
                 "refinement row without before/after");
    }
    c.expect(refine_rows == langs.size(), fmt::format("{} refinement rows", refine_rows));
    const auto table = read_file(work / "report.txt");
    c.expect(table.find("AUROC (x100)") != std::string::npos, "table header");
    c.expect(table.find("Refinement accuracy (x100)") != std::string::npos, "refinement table");
    c.detail = fmt::format("run-all {:.2f}s, {} methods x {} languages, {} refinement rows", secs, methods.size(),
                           langs.size(), refine_rows);
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
        {"AUROC matches brute-force pairwise oracle", auroc_oracle},
        {"likelihood min <= norm <= avg, log-space equals direct product", likelihood_ordering},
        {"perfect separation gives AUROC 1.0", perfect_separation},
        {"5-language mean beats every single language", crosslingual_direction},
        {"refinement threshold semantics", refinement_thresholds},
        {"metric spot values and EM implies F1", metric_spots},
        {"dataset pipeline determinism and filter properties", dataset_determinism},
        {"end-to-end mock run-all", end_to_end},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        try {
            criteria[i].second(c);
        } catch (const std::exception& e) {
            c.failures.push_back(std::string("exception: ") + e.what());
        }
        std::cout << (c.ok() ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first;
        if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
        std::cout << "\n";
        for (const auto& f : c.failures) std::cout << "    " << f << "\n";
        failed += !c.ok();
    }
    std::cout << (failed ? fmt::format("{} of {} criteria failed", failed, criteria.size())
                         : fmt::format("all {} criteria passed", criteria.size()))
              << std::endl;
    return failed ? 1 : 0;
}
