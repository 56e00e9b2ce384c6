#include "skewlab/cli_reporting.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace skewlab;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("skewlab_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

TestReport sample_report(double threshold, bool pass) {
    TestReport r;
    r.suite = "demo";
    r.statistic = 0.125;
    r.threshold = threshold;
    r.n_paths = 10;
    r.n_steps = 64;
    r.seed = SeedSpec{3, "demo", 2};
    set_verdict(r, pass);
    return r;
}

}  // namespace

TEST(Config, ParsesKeysAndComments) {
    const ExperimentConfig c = parse_config_text(
        "# comment\n"
        "suite = martingale\n"
        "\n"
        "alpha=0.3\n"
        "steps = 1024, 4096\n"
        "paths=2000\n"
        "seed = 17\n"
        "schedule.rule = split\n"
        "tol.qp = 0.02\n");
    EXPECT_EQ(c.suite, "martingale");
    EXPECT_EQ(c.alpha, 0.3);
    EXPECT_EQ(*c.n_steps, (std::vector<std::size_t>{1024, 4096}));
    EXPECT_EQ(c.n_paths, 2000u);
    EXPECT_EQ(c.seed, 17u);
    EXPECT_EQ(c.rule, SignRule::split);
    EXPECT_EQ(c.tolerance("qp"), 0.02);
    EXPECT_EQ(c.tolerance("drift"), 4.0);
    EXPECT_NO_THROW(validate_config(c));
}

TEST(Config, ErrorsNameTheOffendingKey) {
    auto key_of = [](const std::string& text) {
        try {
            validate_config(parse_config_text(text));
        } catch (const UsageError& e) {
            return e.key();
        }
        return std::string("<none>");
    };
    EXPECT_EQ(key_of("colour = red\n"), "colour");
    EXPECT_EQ(key_of("alpha = 1.5\n"), "alpha");
    EXPECT_EQ(key_of("alpha = half\n"), "alpha");
    EXPECT_EQ(key_of("steps = 1000, 3000\n"), "steps");
    EXPECT_EQ(key_of("tol.unknown = 1\n"), "tol.unknown");
    EXPECT_EQ(key_of("suite = nope\n"), "suite");
    EXPECT_EQ(key_of("paths = -3\n"), "paths");
    EXPECT_EQ(key_of("schedule.boundaries = 0, 0.5\n"), "schedule.values");
    EXPECT_EQ(key_of("schedule.boundaries = 0, 0.5\nschedule.values = 0.3\n"), "schedule.values");
}

TEST(Config, EchoIsCanonical) {
    ExperimentConfig a = parse_config_text("alpha=0.7\nsuite=skew_law\n");
    ExperimentConfig b = parse_config_text("suite=skew_law\nalpha=0.70\n");
    EXPECT_EQ(config_echo(a), config_echo(b));
}

TEST(Config, DefaultOutputDirectoryHonoursEnvironment) {
    ::unsetenv("SKEWLAB_OUT_DIR");
    EXPECT_EQ(default_output_dir(), "skewlab_out");
    ::setenv("SKEWLAB_OUT_DIR", "/tmp/elsewhere", 1);
    EXPECT_EQ(default_output_dir(), "/tmp/elsewhere");
    ::unsetenv("SKEWLAB_OUT_DIR");
}

TEST(Suites, ListedAndDescribed) {
    const auto suites = list_suites();
    ASSERT_FALSE(suites.empty());
    for (const auto& s : suites) EXPECT_FALSE(describe_suite(s.name).empty());
    EXPECT_THROW(describe_suite("nope"), UsageError);
}

TEST(Render, EmptyBundleIsValidJson) {
    ReportBundle b;
    b.provenance.master_seed = "1";
    const ReportBundle back = parse_report_json(render_json(b));
    EXPECT_TRUE(back.reports.empty());
    EXPECT_EQ(back.provenance.version, kVersion);
}

TEST(Render, JsonRoundTripIncludingInfiniteThreshold) {
    ReportBundle b;
    b.provenance.config = {{"suite", "demo"}};
    b.provenance.master_seed = "3";
    b.reports.push_back(sample_report(std::numeric_limits<double>::infinity(), true));
    b.reports.push_back(sample_report(0.05, false));
    const ReportBundle back = parse_report_json(render_json(b));
    ASSERT_EQ(back.reports.size(), 2u);
    EXPECT_TRUE(std::isinf(back.reports[0].threshold));
    EXPECT_EQ(back.reports[1].threshold, 0.05);
    EXPECT_EQ(back.reports[1].statistic, 0.125);
    EXPECT_EQ(back.reports[0].seed.to_string(), b.reports[0].seed.to_string());
    EXPECT_TRUE(back.reports[0].pass);
    EXPECT_FALSE(back.reports[1].pass);
    EXPECT_EQ(render_json(back), render_json(b));
}

TEST(Render, CsvHasHeaderAndOneRowPerReport) {
    ReportBundle b;
    b.reports.push_back(sample_report(0.05, true));
    const std::string csv = render_csv(b);
    EXPECT_EQ(count_lines(csv), 2u);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "suite,statistic,threshold,n_paths,n_steps,seed,pass");

    CurveFile c;
    c.name = "curve";
    c.series.push_back(CurveSeries{"a", {0.0, 0.5}, {1.0, 2.0}});
    const std::string cc = render_curve_csv(c);
    EXPECT_EQ(cc.substr(0, cc.find('\n')), "t,value,series");
    EXPECT_EQ(count_lines(cc), 3u);
}

TEST(Emit, WritesReportAndCurves) {
    const auto dir = scratch("emit");
    ReportBundle b;
    b.reports.push_back(sample_report(0.05, true));
    CurveFile c;
    c.name = "density";
    c.series.push_back(CurveSeries{"a", {0.0}, {1.0}});
    b.curves.push_back(c);
    const auto p = emit_report(b, ReportFormat::json, dir);
    EXPECT_EQ(p, dir / "report.json");
    EXPECT_TRUE(std::filesystem::exists(dir / "density.csv"));
    EXPECT_EQ(parse_report_json(read_file(p)).reports.size(), 1u);
    EXPECT_EQ(emit_report(b, ReportFormat::csv, dir), dir / "report.csv");
    std::filesystem::remove_all(dir);
}

TEST(Emit, UnwritableDestinationIsAnIoError) {
    const auto file = scratch("blocker");
    std::ofstream(file) << "x";
    EXPECT_THROW(emit_report(ReportBundle{}, ReportFormat::json, file / "sub"), IoError);
    std::filesystem::remove(file);
}

TEST(ExitCode, Classification) {
    ReportBundle b;
    EXPECT_EQ(exit_code(b), 0);
    b.reports.push_back(sample_report(0.05, true));
    EXPECT_EQ(exit_code(b), 0);
    TestReport h = sample_report(0.05, false);
    h.status = ReportStatus::hypothesis_not_met;
    b.reports.push_back(h);
    EXPECT_EQ(exit_code(b), 3);
    b.reports.push_back(sample_report(0.05, false));
    EXPECT_EQ(exit_code(b), 1);
}

TEST(MeshReports, ThresholdScheme) {
    MeshStudy s;
    s.levels = {4, 8, 16};
    s.medians = {0.4, 0.2, 0.1};
    s.sup_norms = {{0.4}, {0.2}, {0.1}};
    const auto r = mesh_reports("tanaka", s, 0.05, SeedSpec{});
    ASSERT_EQ(r.size(), 3u);
    EXPECT_TRUE(std::isinf(r[0].threshold));
    EXPECT_EQ(r[1].threshold, 0.4);
    EXPECT_EQ(r[2].threshold, 0.05);
    EXPECT_TRUE(r[1].pass);
    EXPECT_FALSE(r[2].pass);
}

TEST(Run, SkewLawPasses) {
    ExperimentConfig c = parse_config_text("suite=skew_law\nalpha=0.5\npaths=10000\nsteps=1024\n");
    validate_config(c);
    const ReportBundle b = run_experiment(c);
    ASSERT_FALSE(b.reports.empty());
    for (const auto& r : b.reports) EXPECT_TRUE(r.pass) << r.suite << ": " << r.detail;
    EXPECT_FALSE(b.curves.empty());
    EXPECT_EQ(exit_code(b), 0);
}

TEST(Run, IdentitiesOnSmallLevels) {
    ExperimentConfig c = parse_config_text("suite=identities\nsteps=256,1024,4096\nseeds=8\nreference_steps=65536\n");
    validate_config(c);
    const ReportBundle b = run_experiment(c);
    std::vector<double> tanaka;
    for (const auto& r : b.reports)
        if (r.suite.rfind("identities/tanaka/", 0) == 0) tanaka.push_back(r.statistic);
    ASSERT_EQ(tanaka.size(), 3u);
    EXPECT_GT(tanaka[0], tanaka[1]);
    EXPECT_GT(tanaka[1], tanaka[2]);
}

TEST(Run, SameSeedSameReport) {
    const ExperimentConfig c = parse_config_text("suite=representation\npaths=1000\nsteps=128\n");
    ReportBundle a = run_experiment(c), b = run_experiment(c);
    a.provenance.timestamp = b.provenance.timestamp = "";
    EXPECT_EQ(render_json(a), render_json(b));
}
