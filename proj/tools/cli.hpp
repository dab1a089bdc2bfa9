#pragma once

// Command-line front end. Kept in a header so the tests can drive it in-process.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hetnet/hetnet.hpp"

namespace hetnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
};

/// Seed precedence: --seed, then HETNET_SEED, then the config file.
inline ExperimentConfig resolve_config(const GlobalOptions& g) {
  ExperimentConfig cfg = g.config_path.empty() ? ExperimentConfig{} : load_config(g.config_path);
  if (g.seed) {
    cfg.seed = *g.seed;
  } else if (const char* env = std::getenv("HETNET_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::runtime_error(std::string("HETNET_SEED is not an unsigned integer: ") + env);
    }
  }
  return cfg;
}

/// Scenario from --scenario, else generated from the config. An explicit seed
/// (flag or env) replaces a loaded scenario's channel seed.
inline Scenario resolve_scenario(const GlobalOptions& g, const std::string& path, std::optional<int> users, int trial) {
  const ExperimentConfig cfg = resolve_config(g);
  if (path.empty()) return generate_scenario(cfg, users.value_or(cfg.user_counts.front()), static_cast<std::size_t>(trial));
  Scenario s = load_scenario(path);
  if (g.seed || std::getenv("HETNET_SEED")) s.seed = cfg.seed;
  return s;
}

inline void emit(const GlobalOptions& g, const std::string& text, std::ostream& out) {
  if (g.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(g.out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + g.out_path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + g.out_path);
}

inline std::string rates_text(const RateMatrix& c, const std::string& format) {
  std::ostringstream s;
  if (format == "jsonl") {
    for (std::size_t k = 0; k < c.num_users(); ++k) {
      nlohmann::json rates = nlohmann::json::array();
      for (std::size_t j = 0; j < c.num_bs(); ++j)
        rates.push_back(c.allowed(k, j) ? nlohmann::json(c.rates(k, j)) : nlohmann::json(nullptr));
      s << nlohmann::json{{"user_id", k}, {"rates", rates}}.dump() << '\n';
    }
    return s.str();
  }
  s << "user_id";
  for (std::size_t j = 0; j < c.num_bs(); ++j) s << ",bs_" << j;
  s << '\n';
  for (std::size_t k = 0; k < c.num_users(); ++k) {
    s << k;
    for (std::size_t j = 0; j < c.num_bs(); ++j) {
      s << ',';
      if (c.allowed(k, j)) s << format_number(c.rates(k, j));  // empty: not a candidate
    }
    s << '\n';
  }
  return s.str();
}

struct SolveOutput {
  Assignment assignment;
  double value = 0.0;
  int iterations = 0;
};

inline SolveOutput solve_named(const std::string& alg, const Scenario& s, const ExperimentConfig& cfg) {
  const RateMatrix c = scenario_rates(s);
  const auto loads = s.capacities();
  DualOptions dual = cfg.dual;
  dual.record_trace = false;
  if (alg == "sumrate") {
    auto r = sum_rate_optimal(c, loads);
    return {std::move(r.assignment), r.value};
  }
  if (alg == "propfair") {
    auto r = propfair_optimal(c, loads);
    return {std::move(r.assignment), r.value};
  }
  if (alg == "greedy1" || alg == "greedy2") {
    auto a = alg == "greedy1" ? greedy_global(rate_weights(c, loads)) : greedy_per_bs(rate_weights(c, loads));
    const double v = utility(a, c, 0);
    return {std::move(a), v};
  }
  if (alg == "greedy1_log" || alg == "greedy2_log") {
    const auto w = log_rate_weights(c, loads);
    auto a = alg == "greedy1_log" ? greedy_global(w, GreedyRule::positive_only) : greedy_per_bs(w, GreedyRule::positive_only);
    const double v = utility(a, c, 1);
    return {std::move(a), v};
  }
  if (alg == "joint_dual" || alg == "joint_dual_mandatory") {
    auto r = alg == "joint_dual" ? dual_decomposition(c, loads, dual) : dual_decomposition_mandatory(c, loads, dual);
    if (!r.feasible) throw std::runtime_error("dual decomposition found no load-feasible association");
    return {std::move(r.assignment), r.utility, r.iterations};
  }
  if (alg == "greedy4" || alg == "greedy5") {
    auto r = alg == "greedy4" ? greedy_joint_global(c) : greedy_joint_per_bs(c);
    return {std::move(r.assignment), r.value};
  }
  throw std::invalid_argument("unknown algorithm: " + alg);
}

inline const std::vector<std::string>& solve_algorithms() {
  static const std::vector<std::string> names{"sumrate",    "propfair", "greedy1",
                                              "greedy2",    "greedy1_log", "greedy2_log",
                                              "joint_dual", "joint_dual_mandatory", "greedy4",
                                              "greedy5"};
  return names;
}

inline std::string game_csv(const GameTrace& trace) {
  std::ostringstream s;
  s << "round,phase,provider_utility,user_utility_sum,connected\n";
  for (const auto& r : trace.rounds) {
    std::size_t connected = 0;
    for (const auto& c : r.connections) connected += c.has_value();
    s << r.round << ',' << r.phase << ',' << format_number(r.provider_utility) << ','
      << format_number(r.user_utility_sum) << ',' << connected << '\n';
  }
  return s.str();
}

/// Returns the process exit code; never calls exit().
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"User association and resource allocation for massive MIMO HetNets"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Base RNG seed (overrides HETNET_SEED and config)");
  app.add_option("--config", g.config_path, "Experiment config JSON")->check(CLI::ExistingFile);
  app.add_option("--out", g.out_path, "Output file (default stdout)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));

  std::string scenario_path;
  std::optional<int> users;
  int trial = 0;
  auto add_scenario_opts = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario_path, "Scenario JSON (default: generated from config)")
        ->check(CLI::ExistingFile);
    sub->add_option("--users", users, "User count when generating")->check(CLI::PositiveNumber);
    sub->add_option("--trial", trial, "Trial index when generating")->check(CLI::NonNegativeNumber);
  };

  auto* gen = app.add_subcommand("generate", "Emit a scenario JSON");
  gen->add_option("--users", users, "User count")->check(CLI::PositiveNumber);
  gen->add_option("--trial", trial, "Trial index")->check(CLI::NonNegativeNumber);

  auto* rates = app.add_subcommand("rates", "Emit the rate matrix");
  add_scenario_opts(rates);

  std::string alg;
  auto* solve = app.add_subcommand("solve", "Run one algorithm on one scenario");
  add_scenario_opts(solve);
  solve->add_option("--alg", alg, "Algorithm")->required()->check(CLI::IsMember(solve_algorithms()));

  std::string game_type;
  bool verbose = false;
  auto* game = app.add_subcommand("game", "Run one game and emit its trace");
  add_scenario_opts(game);
  game->add_option("--type", game_type, "Game")->required()->check(CLI::IsMember({"price", "bidding"}));
  game->add_flag("--verbose", verbose, "Include full price/bid matrices in the trace");

  std::string kind = "centralized";
  std::string summary_path;
  auto* experiment = app.add_subcommand("experiment", "Run a Monte-Carlo sweep");
  experiment->add_option("--kind", kind, "Experiment")
      ->check(CLI::IsMember({"centralized", "joint", "game", "bias"}));
  experiment->add_option("--summary", summary_path, "Also write per-(K, algorithm) mean and 95% CI as CSV");

  std::string suite;
  std::size_t count = 200;
  auto* verify = app.add_subcommand("verify", "Run the invariant/oracle suite");
  verify->add_option("--suite", suite, "Suite")->required()->check(CLI::IsMember({"small-oracle"}));
  verify->add_option("--count", count, "Instances per check")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    if (*gen) {
      const ExperimentConfig cfg = resolve_config(g);
      const Scenario s = generate_scenario(cfg, users.value_or(cfg.user_counts.front()), static_cast<std::size_t>(trial));
      emit(g, scenario_to_json(s).dump(2) + "\n", out);
    } else if (*rates) {
      const Scenario s = resolve_scenario(g, scenario_path, users, trial);
      emit(g, rates_text(scenario_rates(s), g.format), out);
    } else if (*solve) {
      const ExperimentConfig cfg = resolve_config(g);
      const Scenario s = resolve_scenario(g, scenario_path, users, trial);
      const auto r = solve_named(alg, s, cfg);
      std::ostringstream text;
      if (g.format == "jsonl") {
        nlohmann::json serving = nlohmann::json::array();
        for (std::size_t k = 0; k < r.assignment.num_users(); ++k) {
          const auto j = r.assignment.serving(k);
          serving.push_back(j ? nlohmann::json(*j) : nlohmann::json(nullptr));
        }
        text << nlohmann::json{{"algorithm", alg}, {"value", r.value}, {"iterations", r.iterations},
                               {"serving", serving}}
                    .dump()
             << '\n';
      } else {
        write_assignment_csv(text, r.assignment);
        err << alg << ": value " << format_number(r.value) << ", " << r.assignment.num_assigned() << " of "
            << r.assignment.num_users() << " users served\n";
      }
      emit(g, text.str(), out);
    } else if (*game) {
      const ExperimentConfig cfg = resolve_config(g);
      const Scenario s = resolve_scenario(g, scenario_path, users, trial);
      const RateMatrix c = scenario_rates(s);
      GameTrace trace;
      if (game_type == "price") {
        auto r = price_game_run(c, s.weights(), s.capacities(), WeightSet(cfg.weight_set), cfg.price_game);
        if (!r.converged) throw std::runtime_error("price game did not converge within max_rounds");
        trace = std::move(r.trace);
      } else {
        auto r = bidding_game_run(c, s.weights(), s.capacities());
        if (!r.converged) throw std::runtime_error("bidding game did not converge");
        trace = std::move(r.trace);
      }
      std::ostringstream text;
      if (g.format == "jsonl")
        write_game_trace_jsonl(text, trace, verbose);
      else
        text << game_csv(trace);
      emit(g, text.str(), out);
    } else if (*experiment) {
      const ExperimentConfig cfg = resolve_config(g);
      ExperimentResult result;
      if (kind == "centralized")
        result = run_centralized_experiment(cfg);
      else if (kind == "joint")
        result = run_joint_experiment(cfg);
      else if (kind == "game")
        result = run_game_experiment(cfg);
      else
        result = run_bias_experiment(cfg);
      std::ostringstream text;
      if (g.format == "jsonl")
        write_result_jsonl(text, result);
      else
        write_result_csv(text, result);
      emit(g, text.str(), out);
      if (!summary_path.empty()) {
        std::ofstream f(summary_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + summary_path);
        write_summary_csv(f, result);
      }
    } else if (*verify) {
      const ExperimentConfig cfg = resolve_config(g);
      std::ostringstream text;
      bool ok = true;
      for (const auto& check : run_small_oracle_suite(cfg.seed, count)) {
        ok = ok && check.passed();
        text << (check.passed() ? "PASS " : "FAIL ") << check.name << " (" << check.cases << " instances";
        if (check.failures) text << ", " << check.failures << " failures; " << check.first_failure;
        text << ")\n";
      }
      emit(g, text.str(), out);
      return ok ? kExitOk : kExitFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace hetnet::cli
