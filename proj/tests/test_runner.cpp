#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "nlmodes/runner.hpp"

using namespace nlmodes::cli;
namespace fs = std::filesystem;

namespace {

class RunnerTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("nlmodes_runner_" + std::string(info->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    RunResult run(const std::string& text, const std::string& out, std::size_t jobs = 1) {
        RunOptions opt;
        opt.out_dir = dir_ / out;
        opt.jobs = jobs;
        return run_config_text(text, dir_, opt);
    }

    fs::path dir_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSimulate = R"(experiment: simulate
system:
  metric: double_pendulum
  potential: {type: circular, k0: 100}
parameters:
  initial_states:
    - {q: [0.2, -0.1], qdot: [0, 0]}
    - {q: [0.0, 0.3], qdot: [1, -1]}
  rest_starts:
    - {energy: 2, angle: 0.4}
  horizon: 2
  dt: 1.0e-3
  sample_stride: 10
)";

}  // namespace

TEST(Scenarios, CatalogueHasBuiltInScenarios) {
    const auto list = list_scenarios();
    EXPECT_GE(list.size(), 2u);
    auto has = [&](const std::string& id) {
        return std::any_of(list.begin(), list.end(), [&](const ScenarioInfo& s) { return s.id == id; });
    };
    EXPECT_TRUE(has("paper-3-1"));
    EXPECT_TRUE(has("paper-3-2"));
    for (const auto& s : list) {
        EXPECT_FALSE(s.description.empty());
        EXPECT_NE(scenario_config(s.id).find("experiment:"), std::string::npos);
    }
    EXPECT_THROW((void)scenario_config("no-such-scenario"), ConfigError);
}

TEST_F(RunnerTest, SimulateWritesTrajectoriesAndReportLast) {
    const auto r = run(kSimulate, "sim");
    ASSERT_EQ(r.exit_code, kExitOk) << r.message;
    ASSERT_FALSE(r.files.empty());
    EXPECT_EQ(r.files.back().filename(), "report.yaml");
    for (int i = 0; i < 3; ++i) {
        EXPECT_TRUE(fs::exists(dir_ / "sim" / ("trajectory_" + std::to_string(i) + ".csv"))) << i;
    }
    const std::string report = slurp(dir_ / "sim" / "report.yaml");
    EXPECT_NE(report.find("status: ok"), std::string::npos);
    EXPECT_EQ(report.find("wall_clock"), std::string::npos);
    EXPECT_EQ(slurp(dir_ / "sim" / "trajectory_0.csv").substr(0, 18), "t,q1,q2,qd1,qd2,E\n");
}

TEST_F(RunnerTest, WorkerCountDoesNotChangeOutputs) {
    ASSERT_EQ(run(kSimulate, "one", 1).exit_code, kExitOk);
    ASSERT_EQ(run(kSimulate, "three", 3).exit_code, kExitOk);
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(dir_ / "one")) {
        EXPECT_EQ(slurp(e.path()), slurp(dir_ / "three" / e.path().filename())) << e.path().filename();
        ++compared;
    }
    EXPECT_EQ(compared, 4u);
}

TEST_F(RunnerTest, MalformedConfigsExitWithSchemaErrorAndWriteNothing) {
    const std::string cases[] = {
        "experiment: simulate\nsystem: {metric: double_pendulum, potential: {type: circular, k0: 100}}\n"
        "parameters: {initial_states: [{q: [0, 0.1]}], horizn: 2}\n",
        "experiment: simulate\nsystem: {metric: double_pendulum}\nparameters: {initial_states: [{q: [0, 0.1]}]}\n",
        "experiment: simulate\nsystem: {metric: double_pendulum, potential: {type: circular, k0: 100}}\n"
        "parameters: {initial_states: [{q: [0, 0.1, 0.2]}]}\n",
        "experiment: simulate\nsystem: {metric: double_pendulum, potential: {type: circular, k0: 100}}\n"
        "parameters: {rest_starts: [{energy: -1, angle: 0}]}\n",
        "experiment: fly\nsystem: {metric: double_pendulum}\n",
        "experiment: simulate\nsystem: {metric: {type: grid, file: missing.csv}, potential: {type: circular, k0: 1}}\n"
        "parameters: {initial_states: [{q: [0, 0.1]}]}\n",
        "experiment: [unbalanced\n",
    };
    int k = 0;
    for (const auto& text : cases) {
        const std::string out = "bad" + std::to_string(k++);
        const auto r = run(text, out);
        EXPECT_EQ(r.exit_code, kExitSchema) << text;
        EXPECT_FALSE(r.message.empty());
        EXPECT_FALSE(fs::exists(dir_ / out)) << text;
    }
}

TEST_F(RunnerTest, EnergyDriftAboveToleranceExitsWithToleranceCode) {
    std::string text = kSimulate;
    text.replace(text.find("dt: 1.0e-3"), 10, "dt: 2.0e-2");
    const auto r = run(text, "drift");
    EXPECT_EQ(r.exit_code, kExitTolerance) << r.message;
    EXPECT_FALSE(fs::exists(dir_ / "drift"));
}

TEST_F(RunnerTest, InvalidMetricValuesExitWithNumericalCode) {
    std::ofstream csv(dir_ / "bad_metric.csv");
    csv << "q1,q2,g11,g12,g22\n";
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            csv << -1.0 + 0.5 * i << ',' << -1.0 + 0.5 * j << ",1,2,1\n";
        }
    }
    csv.close();
    const auto r = run("experiment: simulate\nsystem: {metric: {type: grid, file: bad_metric.csv}, "
                       "potential: {type: circular, k0: 1}}\nparameters: {initial_states: [{q: [0, 0.1]}]}\n",
                       "numerical");
    EXPECT_EQ(r.exit_code, kExitNumerical) << r.message;
    EXPECT_FALSE(fs::exists(dir_ / "numerical"));
}

TEST_F(RunnerTest, OverridesReachTheExperiment) {
    RunOptions opt;
    opt.out_dir = dir_ / "override";
    opt.jobs = 1;
    opt.dt = 2.0e-2;
    EXPECT_EQ(run_config_text(kSimulate, dir_, opt).exit_code, kExitTolerance);
    opt.tol_energy = 1.0;
    EXPECT_EQ(run_config_text(kSimulate, dir_, opt).exit_code, kExitOk);
}

TEST_F(RunnerTest, ExperimentMismatchIsSchemaError) {
    RunOptions opt;
    opt.out_dir = dir_ / "mismatch";
    opt.experiment = "geodesic";
    EXPECT_EQ(run_config_text(kSimulate, dir_, opt).exit_code, kExitSchema);
}

TEST_F(RunnerTest, LinearizeReportsPendulumFrequencies) {
    const auto r = run("experiment: linearize\nsystem: {metric: double_pendulum, potential: {type: circular, k0: 100}}\n",
                       "lin");
    ASSERT_EQ(r.exit_code, kExitOk) << r.message;
    const std::string report = slurp(dir_ / "lin" / "report.yaml");
    EXPECT_NE(report.find("4.142135"), std::string::npos);
    EXPECT_NE(report.find("24.14213"), std::string::npos);
}

TEST_F(RunnerTest, NecessityProbeScenario) {
    RunOptions opt;
    opt.out_dir = dir_ / "probe";
    opt.jobs = 1;
    const auto r = run_scenario("necessity-probe", opt);
    ASSERT_EQ(r.exit_code, kExitOk) << r.message;
    EXPECT_TRUE(fs::exists(dir_ / "probe" / "report.yaml"));
}
