#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "support/oracles.hpp"

namespace fs = std::filesystem;

#ifdef LRDBREAK_CLI_PATH

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lrdbreak_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  /// Runs the CLI with `args`; stderr goes to err.txt in the test directory.
  int run(const std::string& args, const std::string& env = "") const {
    const std::string cmd =
        env + " " + std::string(LRDBREAK_CLI_PATH) + " " + args + " > " + path("out.txt").string() + " 2> " +
        path("err.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string stdout_text() const { return slurp(path("out.txt")); }
  std::string stderr_text() const { return slurp(path("err.txt")); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

  /// Last stderr line parsed as the JSON error record.
  nlohmann::json error_record() const {
    std::istringstream in(stderr_text());
    std::string line, last;
    while (std::getline(in, line))
      if (!line.empty() && line.front() == '{') last = line;
    return last.empty() ? nlohmann::json() : nlohmann::json::parse(last);
  }

  void simulate_fbm(const std::string& name, int seed = 4) const {
    ASSERT_EQ(run("simulate --scenario fbm-2cp --n 5000 --seed " + std::to_string(seed) + " --output " +
                  path(name).string()),
              0)
        << stderr_text();
  }

  std::string fbm_flags() const {
    return "--regime fbm --m 2 --gamma-method analytic_fbm --gamma-table " + path("gamma").string();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateIsDeterministic) {
  ASSERT_EQ(run("simulate --scenario farima-1cp --n 3000 --seed 9 --output " + path("a.csv").string()), 0);
  ASSERT_EQ(run("simulate --scenario farima-1cp --n 3000 --seed 9 --output " + path("b.csv").string()), 0);
  ASSERT_EQ(run("simulate --scenario farima-1cp --n 3000 --seed 10 --output " + path("c.csv").string()), 0);
  const auto a = slurp(path("a.csv"));
  EXPECT_EQ(a.substr(0, 2), "x\n");
  EXPECT_EQ(a, slurp(path("b.csv")));
  EXPECT_NE(a, slurp(path("c.csv")));
  const auto truth = read_json(path("a.truth.json"));
  EXPECT_EQ(truth["schema_version"], "lrdbreak-truth/1");
  EXPECT_EQ(truth["change_points"], nlohmann::json::array({2250}));
  EXPECT_EQ(truth["n"], 3000);
  std::size_t lines = 0;
  for (char c : a) lines += c == '\n';
  EXPECT_EQ(lines, 3002u);  // header + X_0..X_N
}

TEST_F(Cli, SimulateCustomSpec) {
  {
    std::ofstream(path("spec.json"))
        << R"({"n": 2000, "change_fractions": [0.5], "segments": [{"family": "fgn", "hurst": 0.6}, {"family": "white"}]})";
  }
  ASSERT_EQ(run("simulate --scenario custom --spec " + path("spec.json").string() + " --output " +
                path("s.csv").string()),
            0)
      << stderr_text();
  EXPECT_EQ(read_json(path("s.truth.json"))["parameters"]["D_1"], 0.0);
  EXPECT_EQ(run("simulate --scenario custom --output " + path("t.csv").string()), 2);
  EXPECT_EQ(run("simulate --scenario nope --output " + path("t.csv").string()), 2);
}

TEST_F(Cli, DetectWritesValidatedResultAndPlotData) {
  simulate_fbm("x.csv");
  ASSERT_EQ(run("detect --input " + path("x.csv").string() + " --output " + path("r.json").string() + " " +
                fbm_flags()),
            0)
      << stderr_text();
  const auto doc = read_json(path("r.json"));
  std::ifstream schema_in(LRDBREAK_SCHEMA_PATH);
  const auto schema = nlohmann::json::parse(schema_in);
  const auto errors = oracle::validate_schema(doc, schema);
  EXPECT_TRUE(errors.empty()) << errors.front();
  EXPECT_EQ(doc["k_hat"].size(), 2u);
  EXPECT_EQ(doc["segments"].size(), 3u);
  EXPECT_TRUE(fs::exists(path("r.plot.csv")));
  EXPECT_EQ(slurp(path("r.plot.csv")).substr(0, 19), "series,segment,x,y\n");
  EXPECT_NE(stdout_text().find("tau_hat:"), std::string::npos);
  // The Gamma table landed in the directory under a key-derived name.
  std::size_t tables = 0;
  for (const auto& e : fs::directory_iterator(path("gamma"))) tables += e.path().extension() == ".json";
  EXPECT_EQ(tables, 1u);
}

TEST_F(Cli, ReplayFromSavedConfigReproducesOutput) {
  simulate_fbm("x.csv");
  ASSERT_EQ(run("detect --input " + path("x.csv").string() + " --output " + path("r1.json").string() + " " +
                fbm_flags()),
            0)
      << stderr_text();
  ASSERT_EQ(run("detect --config " + path("r1.json").string() + " --output " + path("r2.json").string()), 0)
      << stderr_text();
  EXPECT_EQ(slurp(path("r1.plot.csv")), slurp(path("r2.plot.csv")));
  auto a = read_json(path("r1.json")), b = read_json(path("r2.json"));
  EXPECT_EQ(b["config"]["output"], path("r2.json").string());
  a["config"].erase("output");
  b["config"].erase("output");
  EXPECT_EQ(a, b);
}

TEST_F(Cli, GammaDirectoryFromEnvironment) {
  simulate_fbm("x.csv");
  ASSERT_EQ(run("detect --input " + path("x.csv").string() + " --output " + path("r.json").string() +
                    " --regime fbm --m 2 --gamma-method analytic_fbm",
                "LRDBREAK_GAMMA_DIR=" + path("envdir").string()),
            0)
      << stderr_text();
  EXPECT_TRUE(fs::exists(path("envdir")));
  EXPECT_FALSE(fs::is_empty(path("envdir")));
}

TEST_F(Cli, ConstantInputIsADataError) {
  {
    std::ofstream out(path("zero.csv"));
    out << "x\n";
    for (int i = 0; i <= 5000; ++i) out << "0\n";
  }
  EXPECT_EQ(run("detect --input " + path("zero.csv").string() + " --output " + path("r.json").string() + " --m 1"),
            3);
  const auto err = error_record();
  EXPECT_EQ(err["kind"], "data");
  EXPECT_EQ(err["error"], "degenerate_segment");
  EXPECT_FALSE(fs::exists(path("r.json")));
}

TEST_F(Cli, ExitCodesByErrorKind) {
  {
    std::ofstream(path("bad.csv")) << "value\n1\n2\n";
  }
  EXPECT_EQ(run("detect --input " + path("bad.csv").string() + " --output " + path("r.json").string()), 3);
  EXPECT_EQ(error_record()["error"], "parse_error");
  EXPECT_EQ(run("detect --input " + path("missing.csv").string() + " --output " + path("r.json").string()), 5);
  EXPECT_EQ(error_record()["kind"], "io");
  EXPECT_EQ(run("detect --input a.csv --output b.json --regime arma"), 2);
  EXPECT_EQ(run("detect --no-such-flag"), 2);
  EXPECT_EQ(run("detect --input " + path("bad.csv").string() + " --output " + path("r.json").string() +
                " --gamma-replicates 100"),
            2);
  EXPECT_EQ(error_record()["kind"], "config");
  EXPECT_EQ(run("detect --output " + path("r.json").string()), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, ExperimentSmokeRun) {
  ASSERT_EQ(run("experiment --scenario fbm-2cp --n 5000 --replicates 10 --seed 3 --threads 1 --gamma-method "
                "analytic_fbm --output " +
                path("ex.csv").string()),
            0)
      << stderr_text();
  const auto csv = slurp(path("ex.csv"));
  const std::string header = csv.substr(0, csv.find('\n'));
  EXPECT_EQ(header, "statistic,tau_1,tau_2,H_0_ols,H_1_ols,H_2_ols,H_0_fgls,H_1_fgls,H_2_fgls");
  for (const char* row : {"\nmean,", "\nsd,", "\nrmse,", "\ntruth,", "\ncount,"})
    EXPECT_NE(csv.find(row), std::string::npos) << row;
  EXPECT_TRUE(fs::exists(path("ex.txt")));
  EXPECT_NE(stdout_text().find("rmse"), std::string::npos);
  EXPECT_EQ(run("experiment --scenario fbm-2cp --replicates 9"), 2);
}

TEST_F(Cli, GammaTableCommandBuildsEveryNode) {
  ASSERT_EQ(run("gamma-table --regime fbm --gamma-method analytic_fbm --base-scale 8 --scales 1,2,3 --output " +
                path("tables").string()),
            0)
      << stderr_text();
  std::string printed = stdout_text();
  while (!printed.empty() && printed.back() == '\n') printed.pop_back();
  ASSERT_TRUE(fs::exists(printed));
  const auto j = read_json(printed);
  EXPECT_EQ(j["nodes"].size(), 39u);
  EXPECT_EQ(j["version"], "lrdbreak-gamma-table/1");
  EXPECT_EQ(run("gamma-table --regime fbm --gamma-method analytic_fbm"), 2);
}

#else

TEST(Cli, BinaryNotBuilt) { GTEST_SKIP() << "command-line tool not part of this build"; }

#endif
