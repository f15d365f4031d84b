#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "wgc/harness/config.hpp"
#include "wgc/harness/experiments.hpp"
#include "wgc/harness/report.hpp"

using namespace wgc;
using namespace wgc::harness;

namespace {

json tiny_linear() {
    return json::parse(R"({
        "experiment": "linear-null-control",
        "grid": {"m": 1, "n": 1, "L": 1, "N": [16, 8]},
        "region": {"omega1": [[[0.0, 3.14159]]], "omega2": [[[0.0, 6.283185307179586]]], "margin": 1.2},
        "time": {"T": 2.0, "Nt": 32, "phi": "smooth", "converge": true},
        "solver": {"s": 0.0},
        "data": {"amplitude": 1.0, "band": 2},
        "options": {"observability": true},
        "seed": 4
    })");
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("wgc_harness_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string config_error_path(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<accepted>";
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.path().extension() == ".csv") out[fs::relative(e.path(), dir).string()] = read_file(e.path());
    return out;
}

}  // namespace

TEST(Config, ParsesTheDocumentedSchema) {
    const auto c = parse_config(tiny_linear());
    EXPECT_EQ(c.kind, ExperimentKind::LinearNullControl);
    EXPECT_EQ(c.grid.N, (std::vector<int>{16, 8}));
    EXPECT_EQ(c.time.T, (std::vector<double>{2.0}));
    EXPECT_TRUE(c.time.smooth_phi);
    EXPECT_DOUBLE_EQ(c.region.margin, 1.2);
    EXPECT_EQ(c.seed, 4u);
    EXPECT_TRUE(c.option<bool>("observability", false));
    EXPECT_EQ(c.check<double>("absent", 7.0), 7.0);
}

TEST(Config, ErrorsNameTheField) {
    auto j = tiny_linear();
    j.erase("experiment");
    EXPECT_EQ(config_error_path(j), "$.experiment");
    j = tiny_linear();
    j["experiment"] = "bogus";
    EXPECT_EQ(config_error_path(j), "$.experiment");
    j = tiny_linear();
    j["grid"]["N"] = {15, 8};
    EXPECT_EQ(config_error_path(j), "grid");
    j = tiny_linear();
    j["grid"]["m"] = "one";
    EXPECT_EQ(config_error_path(j), "grid.m");
    j = tiny_linear();
    j.erase("region");
    EXPECT_EQ(config_error_path(j), "region");
    j = tiny_linear();
    j["region"]["omega1"] = {{{0.0}}};
    EXPECT_EQ(config_error_path(j), "region.omega1[0][0]");
    j = tiny_linear();
    j["region"]["margin"] = 0.0;
    EXPECT_EQ(config_error_path(j), "region");
    j = tiny_linear();
    j["time"]["T"] = {1.0, 2.0};
    EXPECT_EQ(config_error_path(j), "time.T");
    j = tiny_linear();
    j["time"]["Nt"] = 20;
    EXPECT_EQ(config_error_path(j), "time.Nt");
    j = tiny_linear();
    j["solver"]["epsilon"] = 2;
    EXPECT_EQ(config_error_path(j), "solver.epsilon");
    j = tiny_linear();
    j["solver"]["relaxation"] = 1.5;
    EXPECT_EQ(config_error_path(j), "solver.relaxation");
    EXPECT_EQ(config_error_path(json::array()), "$");
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, RandomDataIsSeededBandLimitedAndScaled) {
    auto g = WaveguideGrid::make(1, 1, 2, {16, 8});
    const Field a = harness::random_data(g, 2, 0.3, 1.0, 9, 1);
    const Field b = harness::random_data(g, 2, 0.3, 1.0, 9, 1);
    const Field c = harness::random_data(g, 2, 0.3, 1.0, 9, 2);
    EXPECT_EQ(a.values(), b.values());
    EXPECT_NE(a.values(), c.values());
    EXPECT_NEAR(sobolev_norm(a, 1.0), 0.3, 1e-14);
    const Field A = to_spectral(a);
    g->for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
        if (std::abs(WaveguideGrid::signed_index(idx[0], 16)) > 2 || std::abs(WaveguideGrid::signed_index(idx[1], 8)) > 2) {
            EXPECT_LT(std::abs(A[flat]), 1e-15);
        }
    });
}

TEST(Manifest, CsvFormattingRoundTrips) {
    CsvTable t({"a", "b", "c"});
    t.row({"x,y", 0.1, 3LL});
    EXPECT_EQ(t.str(), "a,b,c\nx;y,0.10000000000000001,3\n");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
    EXPECT_THROW(t.row({1.0}), std::logic_error);
}

TEST(Manifest, ChecksumsDetectTampering) {
    const auto dir = scratch("manifest");
    {
        RunWriter w(dir);
        CsvTable t({"k"});
        t.row({1LL});
        w.write_csv("t.csv", t);
        w.summary("answer", 42LL);
        w.invariant("holds", true, "fine");
        w.finalize(json{{"experiment", "x"}}, "ok", 1);
    }
    const auto m = load_manifest(dir);
    EXPECT_EQ(m.at("status"), "ok");
    EXPECT_EQ(m.at("files").size(), 2u);
    EXPECT_FALSE(fs::exists(dir / "manifest.json.tmp"));
    std::ofstream(dir / "t.csv", std::ios::app) << "2\n";
    EXPECT_THROW(load_manifest(dir), std::runtime_error);
    std::ofstream(dir / "manifest.json", std::ios::trunc) << "{ not json";
    EXPECT_THROW(load_manifest(dir), std::runtime_error);
    fs::remove_all(dir);
}

TEST(Report, EmptyDirectoryIsAnError) {
    const auto dir = scratch("empty");
    fs::create_directories(dir);
    EXPECT_THROW(report(dir), std::runtime_error);
    EXPECT_THROW(report(dir / "missing"), std::runtime_error);
    fs::remove_all(dir);
}

TEST(Report, CollatesOneRowPerRunKeyedBySweptParameter) {
    const auto root = scratch("sweep");
    // Hand-built runs with known summaries: the bundle must reproduce them.
    const std::vector<double> amplitudes = {0.01, 0.02, 0.04};
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        RunWriter w(root / ("run" + std::to_string(i)));
        CsvTable t({"sweep", "update_norm"});
        t.row({1LL, amplitudes[i]});
        w.write_csv("fixed_point.csv", t);
        w.summary("contraction_factor", amplitudes[i] * 10);
        w.finalize(json{{"experiment", "nonlinear-null-control"}, {"data", {{"amplitude", amplitudes[i]}}}, {"seed", 3}},
                   "ok", 1);
    }
    const auto single = report(root / "run1", scratch("single"));
    EXPECT_EQ(single.runs, 1);
    EXPECT_EQ(read_csv(single.bundle).size(), 2u);

    const auto res = report(root);
    EXPECT_EQ(res.runs, 3);
    const auto rows = read_csv(res.bundle);
    ASSERT_EQ(rows.size(), 4u);
    const auto& head = rows[0];
    const auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(head.begin(), head.end(), name) - head.begin());
    };
    ASSERT_LT(col("data.amplitude"), head.size());
    ASSERT_LT(col("contraction_factor"), head.size());
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        EXPECT_EQ(rows[i + 1][col("run")], "run" + std::to_string(i));
        EXPECT_EQ(std::stod(rows[i + 1][col("data.amplitude")]), amplitudes[i]);
        EXPECT_EQ(std::stod(rows[i + 1][col("contraction_factor")]), amplitudes[i] * 10);
    }
    ASSERT_EQ(res.tables.size(), 1u);
    const auto fp = read_csv(res.tables[0]);
    ASSERT_EQ(fp.size(), 4u);
    EXPECT_EQ(fp[0], (std::vector<std::string>{"run", "sweep", "update_norm"}));
    EXPECT_EQ(fp[3][0], "run2");
    fs::remove_all(root);
    fs::remove_all(scratch("single"));
}

TEST(RunExperiment, WritesManifestAndIsDeterministicAcrossThreads) {
    const auto cfg = parse_config(tiny_linear());
    const auto a = scratch("det_a"), b = scratch("det_b");
    EXPECT_EQ(run_experiment(cfg, a, 1), 0);
    EXPECT_EQ(run_experiment(cfg, b, 3), 0);
    const auto fa = csv_files(a), fb = csv_files(b);
    ASSERT_FALSE(fa.empty());
    EXPECT_EQ(fa, fb);
    const auto m = load_manifest(a);
    EXPECT_EQ(m.at("config"), tiny_linear());
    EXPECT_EQ(m.at("threads"), 1);
    // Rerunning from the echoed configuration reproduces the results.
    const auto c = scratch("det_c");
    EXPECT_EQ(run_experiment(parse_config(m.at("config")), c, 1), 0);
    EXPECT_EQ(csv_files(c), fa);
    for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST(RunExperiment, InvariantFailureAndRuntimeErrorExitOne) {
    auto j = tiny_linear();
    j["checks"] = {{"max_relative_final", 1e-300}};
    const auto dir = scratch("fail");
    EXPECT_EQ(run_experiment(parse_config(j), dir, 1), 1);
    EXPECT_EQ(load_manifest(dir).at("status"), "invariant-failure");

    j = tiny_linear();
    j["experiment"] = "nonlinear-null-control";
    j["solver"]["delta"] = 1e-6;  // data of norm 1 violates the smallness requirement
    EXPECT_EQ(run_experiment(parse_config(j), dir, 1), 1);
    const auto m = load_manifest(dir);
    EXPECT_EQ(m.at("status"), "error");
    EXPECT_NE(m.at("error").get<std::string>().find("smallness"), std::string::npos);
    fs::remove_all(dir);
}

TEST(RunExperiment, ObservabilitySweepRejectsSmoothing) {
    auto j = tiny_linear();
    j["experiment"] = "observability-sweep";
    j["solver"]["s"] = 1.0;
    const auto dir = scratch("obs");
    EXPECT_THROW(run_experiment(parse_config(j), dir, 1), ConfigError);
    fs::remove_all(dir);
}
