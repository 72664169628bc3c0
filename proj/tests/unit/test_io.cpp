#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include "rmdyn/config.hpp"
#include "rmdyn/driver.hpp"
#include "rmdyn/error.hpp"
#include "rmdyn/record_io.hpp"

using namespace rmdyn;
namespace fs = std::filesystem;

namespace {

const char* kMinimalBorn = R"([experiment]
kind = born
trials = 20
seed = 5
[grid]
n = 256
[walk]
dt = 1
dz = 0.25
[detector]
sigma = 1
)";

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("rmdyn_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
    args.insert(args.begin(), "rmdyn");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream o, e;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), o, e);
    if (out) *out = o.str();
    if (err) *err = e.str();
    return code;
}

std::string fast_born(const fs::path& out_dir) {
    return R"([experiment]
kind = born
trials = 12
seed = 9
centers = -3, 3
[grid]
n = 64
x_min = -16
x_max = 16
[walk]
dt = 1
dz = 0.25
max_steps = 30
calibration_trials = 100
[detector]
sigma = 1
spacing = 6
[output]
dir = )" + out_dir.string() + "\n";
}

void expect_well_formed(const std::string& svg) {
    std::istringstream in(svg);
    boost::property_tree::ptree tree;
    EXPECT_NO_THROW(boost::property_tree::read_xml(in, tree));
    EXPECT_EQ(tree.count("svg"), 1u);
}

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST(Config, MinimalBornFillsDefaults) {
    const RunConfig cfg = parse_config_text(kMinimalBorn);
    EXPECT_EQ(cfg.kind, ExperimentKind::born);
    EXPECT_EQ(cfg.n, 256u);
    EXPECT_EQ(cfg.trials, 20u);
    EXPECT_EQ(cfg.seed, 5u);
    const double dx = (cfg.x_max - cfg.x_min) / static_cast<double>(cfg.n);
    EXPECT_DOUBLE_EQ(cfg.mu_tol, dx);
    EXPECT_DOUBLE_EQ(cfg.spacing, 6.0);
    ASSERT_EQ(cfg.centers.size(), 2u);
    ASSERT_EQ(cfg.weights.size(), 2u);
    EXPECT_DOUBLE_EQ(cfg.weights[0], cfg.weights[1]);
    EXPECT_FALSE(cfg.scale.has_value());
}

TEST(Config, NegativeSigmaNamesKey) {
    std::string text = kMinimalBorn;
    text.replace(text.find("sigma = 1"), 9, "sigma = -1");
    try {
        parse_config_text(text);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.key(), "detector.sigma");
        EXPECT_NE(std::string(e.what()).find("detector.sigma"), std::string::npos);
    }
}

TEST(Config, RejectsUnknownAndDuplicateKeys) {
    EXPECT_THROW(parse_config_text(std::string(kMinimalBorn) + "bogus = 1\n"), ParseError);
    EXPECT_THROW(parse_config_text(std::string(kMinimalBorn) + "sigma = 2\n"), ParseError);
    EXPECT_THROW(parse_config_text("[nowhere]\nkind = born\n"), ParseError);
    EXPECT_THROW(parse_config_text("[experiment]\ntrials = 3\n"), ParseError);
    EXPECT_THROW(parse_config_text("[experiment]\nkind = teleport\n"), ParseError);
}

TEST(Config, SnapshotRoundTrip) {
    for (const char* text :
         {kMinimalBorn,
          "[experiment]\nkind = zeno\nkick_intervals = 0.1, 0.3\n[walk]\ncalibrate = false\n[gue]\nscale = 0.25\n",
          "[experiment]\nkind = qct\npacket_p = 0.1\n[potential]\nkind = harmonic\nk = 0.3\nquartic = 1e-3\n"}) {
        const RunConfig a = parse_config_text(text);
        const RunConfig b = parse_config_text(snapshot(a));
        EXPECT_TRUE(a == b) << text;
        EXPECT_EQ(snapshot(a), snapshot(b));
    }
}

TEST(Record, BornCsvSchemaAndSummaryKeys) {
    TempDir dir;
    RunConfig cfg = parse_config_text(fast_born(dir.path()));
    const auto rec = run_experiment(cfg);
    const std::string csv = trials_csv(rec);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "trial_index,hit_center,steps_to_hit,delta_z_at_hit");
    EXPECT_EQ(count(csv, "\n"), cfg.trials + 1);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    const std::string json = summary_json(rec);
    EXPECT_NE(json.find("\"total_variation\""), std::string::npos);
    EXPECT_NE(json.find("\"hit_rate\""), std::string::npos);
}

TEST(Record, SnapshotRerunIsByteIdentical) {
    TempDir dir;
    const RunConfig cfg = parse_config_text(fast_born(dir.path() / "first"));
    const auto first = run_experiment(cfg);
    write_record(first, (dir.path() / "first").string());
    RunConfig again = parse_config(((dir.path() / "first") / "config.snapshot").string());
    const auto second = run_experiment(again);
    EXPECT_EQ(trials_csv(first), trials_csv(second));
    EXPECT_EQ(summary_json(first), summary_json(second));
    EXPECT_EQ(slurp(dir.path() / "first" / "trials.csv"), trials_csv(second));
}

TEST(Record, NanWrittenAsNull) {
    ExperimentRecord rec;
    rec.kind = "born";
    rec.set("total_variation", std::nan(""));
    rec.set("hits", std::int64_t{0});
    const std::string json = summary_json(rec);
    EXPECT_NE(json.find("\"total_variation\": null"), std::string::npos);
    EXPECT_DOUBLE_EQ(rec.real("hits"), 0.0);
    EXPECT_TRUE(std::isnan(rec.real("missing")));
}

TEST(Plots, EmptyRecordGivesAxesOnlySvg) {
    ExperimentRecord rec;
    rec.kind = "born";
    const std::string svg = plot_svg(rec);
    ASSERT_FALSE(svg.empty());
    expect_well_formed(svg);
    EXPECT_EQ(count(svg, "<line"), 2u);
}

TEST(Plots, BornHasTwoBarsPerCenter) {
    ExperimentRecord rec;
    rec.kind = "born";
    rec.set_series("centers", {-3.0, 3.0});
    rec.set_series("empirical", {0.4, 0.6});
    rec.set_series("target", {0.5, 0.5});
    const std::string svg = plot_svg(rec);
    expect_well_formed(svg);
    // One legend swatch per colour plus one bar per center.
    EXPECT_EQ(count(svg, "fill=\"#4477aa\""), 3u);
    EXPECT_EQ(count(svg, "fill=\"#ee6677\""), 3u);
}

TEST(Plots, EveryPlottedKindIsWellFormed) {
    for (const char* kind : {"born", "qct", "double_slit", "zeno", "brownian"}) {
        ExperimentRecord rec;
        rec.kind = kind;
        rec.set_series("centers", {0.0, 1.0, 2.0});
        rec.set_series("survival", {1.0, 0.5});
        rec.set_series("kick_intervals", {0.5, 1.0});
        rec.set_series("standardized", {-1.0, 0.0, 0.5, 2.0});
        rec.set_series("record_time", {0.0, 1.0});
        rec.set_series("record_mu", {0.0, 0.5});
        expect_well_formed(plot_svg(rec));
    }
    ExperimentRecord other;
    other.kind = "epr";
    EXPECT_TRUE(plot_svg(other).empty());
}

TEST(Cli, ValidateReportsBadKey) {
    TempDir dir;
    std::string text = kMinimalBorn;
    text.replace(text.find("sigma = 1"), 9, "sigma = -1");
    spit(dir.path() / "bad.ini", text);
    spit(dir.path() / "good.ini", kMinimalBorn);
    std::string out, err;
    EXPECT_EQ(cli({"validate", "--config", (dir.path() / "bad.ini").string()}, &out, &err), 1);
    EXPECT_NE(err.find("detector.sigma"), std::string::npos);
    EXPECT_EQ(cli({"validate", "--config", (dir.path() / "good.ini").string()}), 0);
    EXPECT_EQ(cli({"validate", "--config", (dir.path() / "missing.ini").string()}), 1);
    EXPECT_EQ(cli({"frobnicate"}), 1);
}

TEST(Cli, RunTwiceGivesIdenticalSummary) {
    TempDir dir;
    spit(dir.path() / "born.ini", fast_born(dir.path() / "a"));
    const auto cfg = (dir.path() / "born.ini").string();
    ASSERT_EQ(cli({"run", "--config", cfg}), 0);
    ASSERT_EQ(cli({"run", "--config", cfg, "--out", (dir.path() / "b").string(), "--threads", "2"}), 0);
    EXPECT_EQ(slurp(dir.path() / "a" / "summary.json"), slurp(dir.path() / "b" / "summary.json"));
    EXPECT_EQ(slurp(dir.path() / "a" / "trials.csv"), slurp(dir.path() / "b" / "trials.csv"));
    EXPECT_TRUE(fs::exists(dir.path() / "a" / "born.svg"));
    EXPECT_TRUE(fs::exists(dir.path() / "a" / "config.snapshot"));

    ASSERT_EQ(cli({"run", "--config", cfg, "--seed", "10", "--trials", "5", "--out",
                   (dir.path() / "c").string()}),
              0);
    const RunConfig c = parse_config(((dir.path() / "c") / "config.snapshot").string());
    EXPECT_EQ(c.seed, 10u);
    EXPECT_EQ(c.trials, 5u);
}

TEST(Cli, RuntimeErrorExitsTwo) {
    TempDir dir;
    spit(dir.path() / "z.ini",
         "[experiment]\nkind = born\n[walk]\ndz = 100\ncalibration_trials = 100\n[grid]\nn = 64\nx_min = -16\nx_max = 16\n");
    std::string out, err;
    EXPECT_EQ(cli({"calibrate", "--config", (dir.path() / "z.ini").string()}, &out, &err), 2);
    EXPECT_FALSE(err.empty());
}

TEST(Cli, GeometrySuitePasses) {
    std::string out;
    EXPECT_EQ(cli({"suite", "geometry"}, &out), 0);
    EXPECT_EQ(out.find("FAIL"), std::string::npos);
}
