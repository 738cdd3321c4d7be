#include <gtest/gtest.h>

#include <cstdio>
#include <sys/wait.h>

#include <fstream>

#include "mlconf/json_io.hpp"
#include "mlconf/util.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using mlconf::json;
using mlconf::read_file;

namespace {

struct Run {
    int rc = -1;
    std::string out;
    std::string err;
};

Run run(const std::string& args, const fs::path& scratch) {
    const auto err_path = scratch / "stderr.txt";
    const std::string cmd = std::string(MLCONF_CLI) + " " + args + " 2>" + err_path.string();
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
    const int status = ::pclose(pipe);
    r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = read_file(err_path);
    return r;
}

std::size_t line_count(const fs::path& p) {
    const auto s = read_file(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::vector<json> json_lines(const std::string& s) {
    std::vector<json> out;
    std::size_t start = 0;
    for (auto nl = s.find('\n'); nl != std::string::npos; start = nl + 1, nl = s.find('\n', start)) {
        const auto line = s.substr(start, nl - start);
        if (!line.empty() && line.front() == '{') out.push_back(json::parse(line));
    }
    return out;
}

const std::string kConfig = std::string(MLCONF_FIXTURE_DIR) + "/config.json";

// Every regular file under dir, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
    }
    return out;
}

}  // namespace

TEST(Cli, ConfigErrorIsReportedAsJson) {
    testsupport::TempDir dir("cli-cfg");
    mlconf::write_file_atomic(dir / "bad.json", R"({"languages": ["en", "xx"]})");
    const auto r = run("generate -c " + (dir / "bad.json").string(), dir.path());
    EXPECT_EQ(r.rc, 1);
    const auto err = json_lines(r.err);
    ASSERT_FALSE(err.empty()) << r.err;
    EXPECT_EQ(err.back().at("error"), "ConfigError");
    EXPECT_FALSE(err.back().at("message").get<std::string>().empty());

    const auto missing = run("generate -c " + (dir / "absent.json").string(), dir.path());
    EXPECT_EQ(missing.rc, 1);
    EXPECT_FALSE(json_lines(missing.err).empty());
}

TEST(Cli, UsageErrorExitsTwo) {
    testsupport::TempDir dir("cli-usage");
    EXPECT_EQ(run("frobnicate", dir.path()).rc, 2);
    EXPECT_EQ(run("score -c " + kConfig + " --bogus", dir.path()).rc, 2);
}

TEST(Cli, StagesProduceExpectedArtifacts) {
    testsupport::TempDir dir("cli-stages");
    const auto work = dir / "work";
    const std::string common = " -c " + kConfig + " --work-dir " + work.string();

    auto r = run("build-dataset" + common, dir.path());
    ASSERT_EQ(r.rc, 0) << r.err;
    for (const char* l : {"en", "fr", "zh"}) EXPECT_EQ(line_count(work / "dataset" / (std::string(l) + ".jsonl")), 50u);
    EXPECT_EQ(line_count(work / "dataset" / "review_sheet.csv"), 51u);

    r = run("generate" + common, dir.path());
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto summary = json_lines(r.out);
    ASSERT_EQ(summary.size(), 1u);
    EXPECT_EQ(summary[0].at("stage"), "generate");
    EXPECT_EQ(summary[0].at("records"), 150);

    r = run("score --method verbal-number --language zh" + common, dir.path());
    ASSERT_EQ(r.rc, 0) << r.err;
    EXPECT_EQ(line_count(work / "scores" / "verbal-number.zh.jsonl"), 50u);
    EXPECT_FALSE(fs::exists(work / "scores" / "verbal-number.en.jsonl"));

    r = run("score --methods verbal-number --languages en,fr" + common, dir.path());
    ASSERT_EQ(r.rc, 0) << r.err;

    r = run("aggregate --grouping mixed3" + common, dir.path());
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto cross = read_file(work / "scores" / "cross-lingual.mixed3.jsonl");
    const auto rows = json_lines(cross);
    EXPECT_EQ(rows.size(), 50u);
    std::set<std::string> ids;
    for (const auto& row : rows) {
        ids.insert(row.at("item_id").get<std::string>());
        EXPECT_EQ(row.at("language"), "en");
        EXPECT_EQ(row.at("method"), "cross-lingual");
    }
    EXPECT_EQ(ids.size(), 50u);

    r = run("refine --policy fixed:0.5 --language en" + common, dir.path());
    ASSERT_EQ(r.rc, 0) << r.err;
    EXPECT_EQ(line_count(work / "refined" / "en.jsonl"), 50u);

    r = run("evaluate" + common, dir.path());
    ASSERT_EQ(r.rc, 0) << r.err;
    r = run("report --format json" + common, dir.path());
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto report = json::parse(r.out);
    EXPECT_EQ(report.at("languages").size(), 3u);
    EXPECT_TRUE(fs::exists(work / "report.txt"));
    EXPECT_TRUE(fs::exists(work / "auroc.csv"));

    r = run("report --format table" + common, dir.path());
    EXPECT_NE(r.out.find("AUROC (x100)"), std::string::npos);
}

TEST(Cli, MissingPrerequisiteFails) {
    testsupport::TempDir dir("cli-prereq");
    const auto r = run("score -c " + kConfig + " --work-dir " + (dir / "w").string(), dir.path());
    EXPECT_EQ(r.rc, 1);
    EXPECT_FALSE(json_lines(r.err).empty());
}

TEST(Cli, RunAllIsReproducibleAndCacheable) {
    testsupport::TempDir dir("cli-repro");
    const auto a = run("run-all -c " + kConfig + " --work-dir " + (dir / "a").string(), dir.path());
    ASSERT_EQ(a.rc, 0) << a.err;
    const auto b = run("run-all -c " + kConfig + " --work-dir " + (dir / "b").string() + " --concurrency 1",
                       dir.path());
    ASSERT_EQ(b.rc, 0) << b.err;
    const auto sa = snapshot(dir / "a");
    EXPECT_GT(sa.size(), 20u);
    EXPECT_EQ(sa, snapshot(dir / "b"));

    const std::string cached = " -c " + kConfig + " --work-dir " + (dir / "c").string() +
                               " --cache-dir " + (dir / "cache").string();
    ASSERT_EQ(run("run-all" + cached, dir.path()).rc, 0);
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "cache")) ++entries;
    EXPECT_GT(entries, 0u);
    ASSERT_EQ(run("run-all" + cached, dir.path()).rc, 0);
    EXPECT_EQ(snapshot(dir / "c"), sa);

    const auto purge = run("purge-cache --model mock-answer" + cached, dir.path());
    ASSERT_EQ(purge.rc, 0) << purge.err;
    const auto purged = json_lines(purge.out);
    ASSERT_FALSE(purged.empty());
    EXPECT_GT(purged.back().at("purged").get<std::size_t>(), 0u);
}

TEST(Cli, TemplatesExport) {
    testsupport::TempDir dir("cli-tpl");
    const auto r = run("templates export " + (dir / "t").string(), dir.path());
    ASSERT_EQ(r.rc, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "t" / "answer.en.txt"));
    EXPECT_TRUE(fs::exists(dir / "t" / "verbal_word.zh.txt"));
}

TEST(Fixture, RegenerationMatchesCommittedFiles) {
    testsupport::TempDir dir("fixture");
    const std::string cmd = std::string(MLCONF_MAKE_FIXTURE) + " " + dir.path().string() + " >/dev/null 2>&1";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    const auto fresh = snapshot(dir.path());
    const auto committed = snapshot(MLCONF_FIXTURE_DIR);
    ASSERT_EQ(fresh.size(), committed.size());
    for (const auto& [name, contents] : committed) {
        ASSERT_TRUE(fresh.count(name)) << name;
        EXPECT_EQ(fresh.at(name), contents) << name << " drifted; rerun make_fixture";
    }
}
