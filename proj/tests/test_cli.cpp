#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hetnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = hetnet::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    unsetenv("HETNET_SEED");
    dir_ = fs::temp_directory_path() / ("hetnet_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override {
    unsetenv("HETNET_SEED");
    fs::remove_all(dir_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  std::string small_config() const {
    return write("small.json", R"({"user_counts": [8, 16], "trials": 2, "seed": 5})");
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"generate", "--bogus"}).code, 2);
  EXPECT_EQ(cli({"--format", "xml", "generate"}).code, 2);
  EXPECT_EQ(cli({"solve"}).code, 2);  // --alg is required
  EXPECT_EQ(cli({"solve", "--alg", "simplex"}).code, 2);
  EXPECT_EQ(cli({"rates", "--scenario", path("missing.json")}).code, 2);
  EXPECT_EQ(cli({"verify", "--suite", "everything"}).code, 2);
}

TEST_F(CliTest, HelpExitsZero) {
  const auto r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("experiment"), std::string::npos);
}

TEST_F(CliTest, RuntimeFailuresExitOne) {
  const auto bad = write("bad.json", R"({"trials": 0})");
  const auto r = cli({"--config", bad, "generate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("trials"), std::string::npos);
  const auto garbage = write("garbage.json", "{not json");
  EXPECT_EQ(cli({"--config", garbage, "generate"}).code, 1);
  EXPECT_EQ(cli({"--out", path("no/such/dir/x.csv"), "generate"}).code, 1);
  setenv("HETNET_SEED", "abc", 1);
  EXPECT_EQ(cli({"generate"}).code, 1);
}

TEST_F(CliTest, GenerateEmitsScenarioJson) {
  const auto r = cli({"generate", "--users", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["base_stations"].size(), 11u);
  EXPECT_EQ(j["users"].size(), 7u);
  EXPECT_EQ(j["base_stations"][0]["x"], 500.0);
  EXPECT_NO_THROW(hetnet::scenario_from_json(j));
}

TEST_F(CliTest, SeedPrecedenceFlagOverEnvOverFile) {
  const auto cfg = write("seeded.json", R"({"seed": 11})");
  const auto file_only = cli({"--config", cfg, "generate"}).out;
  const auto flag_11 = cli({"--seed", "11", "generate"}).out;
  EXPECT_EQ(file_only, flag_11);

  setenv("HETNET_SEED", "12", 1);
  const auto env = cli({"--config", cfg, "generate"}).out;
  EXPECT_EQ(env, cli({"--seed", "12", "generate"}).out);
  EXPECT_NE(env, file_only);
  const auto flag = cli({"--config", cfg, "--seed", "11", "generate"}).out;
  EXPECT_EQ(flag, file_only);
}

TEST_F(CliTest, RatesCsvShape) {
  const auto r = cli({"rates", "--users", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "user_id,bs_0,bs_1,bs_2,bs_3,bs_4,bs_5,bs_6,bs_7,bs_8,bs_9,bs_10");
  int rows = 0;
  for (std::string line; std::getline(in, line);) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 11);
    ++rows;
  }
  EXPECT_EQ(rows, 4);
  const auto j = cli({"--format", "jsonl", "rates", "--users", "4"});
  EXPECT_EQ(std::count(j.out.begin(), j.out.end(), '\n'), 4);
}

TEST_F(CliTest, SolveIsByteIdenticalOnSavedScenario) {
  ASSERT_EQ(cli({"--out", path("s.json"), "generate", "--users", "40"}).code, 0);
  ASSERT_EQ(cli({"--out", path("a.csv"), "solve", "--alg", "sumrate", "--scenario", path("s.json")}).code, 0);
  ASSERT_EQ(cli({"--out", path("b.csv"), "solve", "--alg", "sumrate", "--scenario", path("s.json")}).code, 0);
  const auto a = slurp(path("a.csv"));
  EXPECT_EQ(a, slurp(path("b.csv")));
  EXPECT_EQ(a.substr(0, 14), "user_id,bs_id\n");
  for (const auto& alg : hetnet::cli::solve_algorithms()) {
    const auto r = cli({"--format", "jsonl", "solve", "--alg", alg, "--scenario", path("s.json")});
    ASSERT_EQ(r.code, 0) << alg << ": " << r.err;
    EXPECT_EQ(nlohmann::json::parse(r.out)["algorithm"], alg);
  }
}

TEST_F(CliTest, GameTraces) {
  const auto price = cli({"--format", "jsonl", "game", "--type", "price", "--users", "10"});
  ASSERT_EQ(price.code, 0) << price.err;
  std::istringstream lines(price.out);
  std::string first;
  std::getline(lines, first);
  const auto j = nlohmann::json::parse(first);
  EXPECT_EQ(j["round"], 1);
  EXPECT_FALSE(j.contains("prices_or_bids"));
  const auto verbose = cli({"--format", "jsonl", "game", "--type", "bidding", "--users", "10", "--verbose"});
  ASSERT_EQ(verbose.code, 0);
  EXPECT_NE(verbose.out.find("prices_or_bids\""), std::string::npos);
  const auto table = cli({"game", "--type", "bidding", "--users", "10"});
  EXPECT_EQ(table.out.substr(0, table.out.find('\n')), "round,phase,provider_utility,user_utility_sum,connected");
}

TEST_F(CliTest, ExperimentCsvContractAndDeterminism) {
  const auto cfg = small_config();
  ASSERT_EQ(cli({"--config", cfg, "--out", path("r1.csv"), "experiment", "--summary", path("s1.csv")}).code, 0);
  ASSERT_EQ(cli({"--config", cfg, "--out", path("r2.csv"), "experiment", "--summary", path("s2.csv")}).code, 0);
  const auto r1 = slurp(path("r1.csv"));
  EXPECT_EQ(r1.substr(0, r1.find('\n')), "K,algorithm,trial,value,rounds,runtime_ms");
  EXPECT_EQ(r1, slurp(path("r2.csv")));
  EXPECT_EQ(slurp(path("s1.csv")), slurp(path("s2.csv")));
  for (const char* kind : {"joint", "game", "bias"}) {
    const auto a = cli({"--config", cfg, "--format", "jsonl", "experiment", "--kind", kind});
    ASSERT_EQ(a.code, 0) << kind << ": " << a.err;
    EXPECT_EQ(a.out, cli({"--config", cfg, "--format", "jsonl", "experiment", "--kind", kind}).out);
  }
}

TEST_F(CliTest, VerifySmallOracle) {
  const auto r = cli({"verify", "--suite", "small-oracle", "--count", "30"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 7);
}

TEST_F(CliTest, ShippedConfigsLoad) {
  for (const auto& entry : fs::directory_iterator(HETNET_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(hetnet::load_config(entry.path().string())) << entry.path();
  }
}
