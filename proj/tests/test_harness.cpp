#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "hetnet/experiment.hpp"
#include "hetnet/verify.hpp"

using namespace hetnet;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.user_counts = {12, 24};
  cfg.trials = 3;
  cfg.seed = 2024;
  return cfg;
}

std::string csv(const ExperimentResult& r) {
  std::ostringstream out;
  write_result_csv(out, r);
  return out.str();
}

}  // namespace

TEST(Scenario, TableOneDefaults) {
  const ExperimentConfig cfg;
  const Scenario s = generate_scenario(cfg, 50, 0);
  ASSERT_EQ(s.num_bs(), 11u);
  EXPECT_EQ(s.num_users(), 50u);
  EXPECT_EQ(s.macro_index(), 0u);
  const auto& macro = s.base_stations[0];
  EXPECT_EQ(macro.position.x, 500.0);
  EXPECT_EQ(macro.position.y, 500.0);
  EXPECT_EQ(macro.antennas, 100);
  EXPECT_EQ(macro.load_capacity, 10);
  EXPECT_DOUBLE_EQ(macro.tx_power, 10.0);
  EXPECT_EQ(macro.path_loss_exponent, 3.5);
  for (std::size_t j = 1; j < 11; ++j) {
    const auto& p = s.base_stations[j];
    EXPECT_EQ(p.kind, BsKind::pico);
    EXPECT_EQ(p.antennas, 4);
    EXPECT_EQ(p.load_capacity, 4);
    EXPECT_DOUBLE_EQ(p.tx_power, 10.0);
    EXPECT_EQ(p.path_loss_exponent, 4.0);
  }
  for (const auto& u : s.users) EXPECT_TRUE(WeightSet::uniform_grid().contains(u.weight));
}

TEST(Scenario, DeterministicPerTrialAndSeparatedAcrossTrials) {
  const ExperimentConfig cfg;
  const Scenario a = generate_scenario(cfg, 30, 4);
  const Scenario b = generate_scenario(cfg, 30, 4);
  const Scenario c = generate_scenario(cfg, 30, 5);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_NE(a.seed, c.seed);
  for (std::size_t k = 0; k < 30; ++k) {
    EXPECT_EQ(a.users[k].position.x, b.users[k].position.x);
    EXPECT_EQ(a.users[k].weight, b.users[k].weight);
  }
  EXPECT_NE(a.base_stations[1].position.x, c.base_stations[1].position.x);
  EXPECT_EQ(scenario_rates(a).rates, scenario_rates(b).rates);
}

TEST(Scenario, LargerSweepsExtendTheSameUsers) {
  const ExperimentConfig cfg;
  const Scenario small = generate_scenario(cfg, 50, 2);
  const Scenario large = generate_scenario(cfg, 100, 2);
  for (std::size_t j = 0; j < small.num_bs(); ++j)
    EXPECT_EQ(small.base_stations[j].position.x, large.base_stations[j].position.x);
  for (std::size_t k = 0; k < 50; ++k) EXPECT_EQ(small.users[k].position.y, large.users[k].position.y);
}

TEST(Scenario, SeedChangesPlacement) {
  ExperimentConfig a, b;
  b.seed = a.seed + 1;
  EXPECT_NE(generate_scenario(a, 5, 0).users[0].position.x, generate_scenario(b, 5, 0).users[0].position.x);
}

TEST(Config, RejectsInvalid) {
  ExperimentConfig cfg;
  cfg.trials = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.user_counts = {10, 0};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.pico.load = 5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.weight_set = {};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(config_from_json(nlohmann::json{{"trials", 0}}), std::invalid_argument);
  EXPECT_THROW(config_from_json(nlohmann::json{{"price_game", {{"evaluation", "cubic"}}}}), std::invalid_argument);
}

TEST(Config, JsonRoundTripAndPartialOverride) {
  ExperimentConfig cfg = small_config();
  cfg.macro.rate_bias = 0.5;
  cfg.price_game.form = EvaluationForm::literal_rate;
  cfg.dual.gamma = 20.0;
  const auto j = config_to_json(cfg);
  const auto back = config_from_json(j);
  EXPECT_EQ(config_to_json(back), j);

  const auto partial = config_from_json(nlohmann::json::parse(R"({"num_bs": 3, "pico": {"load": 2}})"));
  EXPECT_EQ(partial.num_bs, 3);
  EXPECT_EQ(partial.pico.load, 2);
  EXPECT_EQ(partial.pico.antennas, 4);
  EXPECT_EQ(partial.trials, 50);
  EXPECT_EQ(partial.user_counts, (std::vector<int>{50, 100, 150, 200, 250}));
}

TEST(Stats, StudentTHalfWidth) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const auto s = summarize(x);
  EXPECT_EQ(s.n, 5u);
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_NEAR(s.stddev, 1.5811388300841898, 1e-12);
  EXPECT_NEAR(s.half_width, 1.9632431614775607, 1e-9);
  EXPECT_NEAR(summarize(std::vector<double>{2.5, 3.0}).half_width, 3.1765511841080234, 1e-9);
  EXPECT_EQ(summarize(std::vector<double>{7.0}).half_width, 0.0);
  EXPECT_EQ(summarize(std::vector<double>{}).n, 0u);
}

TEST(Stats, HalfWidthShrinksLikeInverseSqrt) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(5.0, 2.0);
  std::vector<double> xs(6400);
  for (double& v : xs) v = n(rng);
  const double h100 = summarize(std::span<const double>(xs.data(), 100)).half_width;
  const double h400 = summarize(std::span<const double>(xs.data(), 400)).half_width;
  const double h6400 = summarize(xs).half_width;
  EXPECT_NEAR(h100 / h400, 2.0, 0.4);
  EXPECT_NEAR(h400 / h6400, 4.0, 0.8);
}

TEST(Output, NumberFormattingRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 6.523561956057013, 1e-300, 123456789.0, -2.5, 0.0}) {
    const std::string s = format_number(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(2.0), "2");
}

TEST(Output, CsvQuoting) {
  EXPECT_EQ(csv_field("greedy1"), "greedy1");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Centralized, RowsDominanceAndDeterminism) {
  const auto cfg = small_config();
  const auto r = run_centralized_experiment(cfg);
  EXPECT_EQ(r.rows.size(), 2u * 3u * 7u);
  std::set<std::string> names;
  for (const auto& row : r.rows) {
    names.insert(row.algorithm);
    EXPECT_FALSE(row.runtime_ms.has_value());
  }
  EXPECT_EQ(names, (std::set<std::string>{"sumrate_opt", "greedy1", "greedy2", "propfair_opt", "greedy1_log",
                                          "greedy2_log", "ub1"}));
  for (int users : cfg.user_counts) {
    const auto opt = r.values(users, "sumrate_opt");
    const auto g1 = r.values(users, "greedy1");
    const auto pf = r.values(users, "propfair_opt");
    const auto bound = r.values(users, "ub1");
    ASSERT_EQ(opt.size(), 3u);
    for (std::size_t t = 0; t < 3; ++t) {
      EXPECT_GE(opt[t] + 1e-9, g1[t]);
      EXPECT_GE(g1[t], 0.0);
      EXPECT_LE(pf[t], bound[t] + 1e-9);
    }
  }
  const std::string text = csv(r);
  EXPECT_EQ(text.substr(0, text.find('\n')), "K,algorithm,trial,value,rounds,runtime_ms");
  EXPECT_EQ(text, csv(run_centralized_experiment(cfg)));
}

TEST(Centralized, AlgorithmSelectionAndRuntime) {
  auto cfg = small_config();
  cfg.algorithms = {"greedy2"};
  cfg.record_runtime = true;
  const auto r = run_centralized_experiment(cfg);
  ASSERT_EQ(r.rows.size(), 6u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.algorithm, "greedy2");
    ASSERT_TRUE(row.runtime_ms.has_value());
    EXPECT_GE(*row.runtime_ms, 0.0);
  }
}

TEST(Aggregates, RecomputableFromTrials) {
  const auto r = run_centralized_experiment(small_config());
  const auto aggs = r.aggregates();
  EXPECT_EQ(aggs.size(), 14u);
  for (const auto& a : aggs) {
    const auto v = r.values(a.users, a.algorithm);
    const auto s = summarize(v);
    EXPECT_EQ(a.summary.mean, s.mean);
    EXPECT_EQ(a.summary.half_width, s.half_width);
    EXPECT_EQ(a.summary.n, 3u);
  }
  std::ostringstream out;
  write_summary_csv(out, r);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "K,algorithm,n,mean,ci95_half_width");
}

TEST(Joint, OptionalDominatesMandatoryPerTrial) {
  auto cfg = small_config();
  cfg.user_counts = {20, 60};
  cfg.dual.max_iter = 2000;
  const auto r = run_joint_experiment(cfg);
  const auto opt = r.values(20, "joint_dual");
  const auto man = r.values(20, "joint_dual_mandatory");
  ASSERT_EQ(opt.size(), 3u);
  ASSERT_EQ(man.size(), 3u);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_GE(opt[t] + 1e-9, man[t]);
  // Total load 50 < 60 users: no mandatory rows.
  EXPECT_TRUE(r.values(60, "joint_dual_mandatory").empty());
  EXPECT_EQ(r.values(60, "greedy4").size(), 3u);
  for (const auto& row : r.rows) {
    if (row.algorithm == "joint_dual") {
      EXPECT_GT(row.rounds, 0);
    }
  }
}

TEST(Games, RoundBoundsAndNames) {
  const auto cfg = small_config();
  const auto r = run_game_experiment(cfg);
  const int bound = ceil_log2(cfg.weight_set.size()) + 1;
  int price_rows = 0;
  for (const auto& row : r.rows) {
    if (row.algorithm == "price_game") {
      ++price_rows;
      EXPECT_LE(row.rounds, bound);
    } else if (row.algorithm == "bidding_game") {
      EXPECT_LE(row.rounds, row.users * cfg.num_bs);
    } else {
      EXPECT_EQ(row.algorithm, "price_game_users");
    }
  }
  EXPECT_EQ(price_rows, 6);
}

TEST(Games, PriceGameUserUtilityEndsAtZero) {
  // Per-round monotonicity does not hold: a rejected probe lowers the next
  // price and raises that user's surplus. The end state is pinned instead.
  ExperimentConfig cfg;
  const WeightSet ws(cfg.weight_set);
  int increases = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Scenario s = generate_scenario(cfg, 50, static_cast<std::size_t>(trial));
    const auto r = price_game_run(scenario_rates(s), s.weights(), s.capacities(), ws);
    ASSERT_TRUE(r.converged);
    const auto& rounds = r.trace.rounds;
    ASSERT_FALSE(rounds.empty());
    EXPECT_NEAR(rounds.back().user_utility_sum, 0.0, 1e-9);
    for (const auto& round : rounds) EXPECT_GE(round.user_utility_sum, rounds.back().user_utility_sum - 1e-9);
    for (std::size_t i = 1; i < rounds.size(); ++i)
      increases += rounds[i].user_utility_sum > rounds[i - 1].user_utility_sum + 1e-9;
  }
  EXPECT_GT(increases, 0);
}

TEST(Bias, PairedArms) {
  auto cfg = small_config();
  cfg.user_counts = {30};
  const auto r = run_bias_experiment(cfg);
  EXPECT_EQ(r.values(30, "bidding_bias_1").size(), 3u);
  EXPECT_EQ(r.values(30, "bidding_bias_0.5").size(), 3u);
  EXPECT_EQ(csv(r), csv(run_bias_experiment(cfg)));
}

TEST(Bias, MacroBidsDropByWeightWhenSaturated) {
  // Halving a rate lowers omega log2 c by exactly omega while the bid stays positive.
  ExperimentConfig cfg;
  Scenario s = generate_scenario(cfg, 100, 0);
  const auto plain = bid_matrix(scenario_rates(s), s.weights());
  s.base_stations[s.macro_index()].rate_bias = 0.5;
  const auto biased = bid_matrix(scenario_rates(s), s.weights());
  const auto w = s.weights();
  int checked = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (biased(k, 0) > 0.0) {
      EXPECT_NEAR(plain(k, 0) - biased(k, 0), w[k], 1e-9);
      ++checked;
    }
    for (std::size_t j = 1; j < s.base_stations.size(); ++j) EXPECT_EQ(plain(k, j), biased(k, j));
  }
  EXPECT_GT(checked, 0);
}

TEST(Output, JsonLinesRows) {
  auto cfg = small_config();
  cfg.user_counts = {5};
  cfg.trials = 1;
  cfg.algorithms = {"ub1"};
  const auto r = run_centralized_experiment(cfg);
  std::ostringstream out;
  write_result_jsonl(out, r);
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["K"], 5);
  EXPECT_EQ(j["algorithm"], "ub1");
  EXPECT_TRUE(j["runtime_ms"].is_null());
}
