#pragma once

// Seeded Monte-Carlo experiment harness: configuration, scenario generation
// and the centralized / joint / game experiment runners.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetnet/assign_opt.hpp"
#include "hetnet/games.hpp"
#include "hetnet/joint_alloc.hpp"
#include "hetnet/model.hpp"
#include "hetnet/stats.hpp"
#include "json.hpp"

namespace hetnet {

struct BsConfig {
  int antennas = 4;
  int load = 4;
  double power_dbm = 40.0;
  double rate_bias = 1.0;
  double path_loss_exponent = kPicoPathLossExponent;
};

struct ExperimentConfig {
  int num_bs = 11;  // one macro plus num_bs - 1 picos
  std::vector<int> user_counts{50, 100, 150, 200, 250};
  Area area{1000.0, 1000.0};
  BsConfig macro{100, 10, 40.0, 1.0, kMacroPathLossExponent};
  BsConfig pico{4, 4, 40.0, 1.0, kPicoPathLossExponent};
  double coverage_radius = 300.0;
  bool macro_interference_includes_picos = true;
  std::vector<double> weight_set = WeightSet::uniform_grid().values();
  std::vector<std::string> algorithms;  // empty: every algorithm of the experiment
  DualOptions dual;
  PriceGameOptions price_game;
  std::vector<double> macro_biases{1.0, 0.5};  // rate-bias experiment arms
  int trials = 50;
  std::uint64_t seed = 1;
  bool record_runtime = false;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (num_bs < 1) throw std::invalid_argument("config: num_bs must be >= 1 (the macro)");
    if (user_counts.empty()) throw std::invalid_argument("config: user_counts must not be empty");
    for (int k : user_counts)
      if (k < 1) throw std::invalid_argument("config: user counts must be positive");
    if (!(area.width > 0.0) || !(area.height > 0.0)) throw std::invalid_argument("config: area must be positive");
    for (const BsConfig* b : {&macro, &pico})
      if (b->load < 0 || b->load > b->antennas || b->antennas < 1)
        throw std::invalid_argument("config: load must be in [0, antennas]");
    WeightSet check(weight_set);
    (void)check;
  }
};

// ---------------------------------------------------------------------------
// Config JSON
// ---------------------------------------------------------------------------

namespace detail {

inline BsConfig bs_config_from_json(const nlohmann::json& j, BsConfig d) {
  d.antennas = j.value("antennas", d.antennas);
  d.load = j.value("load", d.load);
  d.power_dbm = j.value("power_dbm", d.power_dbm);
  d.rate_bias = j.value("rate_bias", d.rate_bias);
  d.path_loss_exponent = j.value("path_loss_exponent", d.path_loss_exponent);
  return d;
}

inline nlohmann::json bs_config_to_json(const BsConfig& b) {
  return {{"antennas", b.antennas},
          {"load", b.load},
          {"power_dbm", b.power_dbm},
          {"rate_bias", b.rate_bias},
          {"path_loss_exponent", b.path_loss_exponent}};
}

}  // namespace detail

/// Missing keys keep their defaults.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.num_bs = j.value("num_bs", c.num_bs);
  c.user_counts = j.value("user_counts", c.user_counts);
  if (j.contains("area")) c.area = {j["area"].value("w", c.area.width), j["area"].value("h", c.area.height)};
  if (j.contains("macro")) c.macro = detail::bs_config_from_json(j["macro"], c.macro);
  if (j.contains("pico")) c.pico = detail::bs_config_from_json(j["pico"], c.pico);
  c.coverage_radius = j.value("coverage_radius", c.coverage_radius);
  c.macro_interference_includes_picos = j.value("macro_interference_includes_picos", c.macro_interference_includes_picos);
  c.weight_set = j.value("weight_set", c.weight_set);
  c.algorithms = j.value("algorithms", c.algorithms);
  if (j.contains("dual")) {
    const auto& d = j["dual"];
    c.dual.theta = d.value("theta", c.dual.theta);
    c.dual.gamma = d.value("gamma", c.dual.gamma);
    c.dual.tol = d.value("tol", c.dual.tol);
    c.dual.max_iter = d.value("max_iter", c.dual.max_iter);
  }
  if (j.contains("price_game")) {
    const auto& p = j["price_game"];
    c.price_game.epsilon = p.value("epsilon", c.price_game.epsilon);
    c.price_game.max_rounds = p.value("max_rounds", c.price_game.max_rounds);
    const std::string form = p.value("evaluation", std::string("log"));
    if (form == "log")
      c.price_game.form = EvaluationForm::log_rate;
    else if (form == "literal")
      c.price_game.form = EvaluationForm::literal_rate;
    else
      throw std::invalid_argument("config: price_game.evaluation must be \"log\" or \"literal\"");
  }
  c.macro_biases = j.value("macro_biases", c.macro_biases);
  c.trials = j.value("trials", c.trials);
  c.seed = j.value("seed", c.seed);
  c.record_runtime = j.value("record_runtime", c.record_runtime);
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  return {{"num_bs", c.num_bs},
          {"user_counts", c.user_counts},
          {"area", {{"w", c.area.width}, {"h", c.area.height}}},
          {"macro", detail::bs_config_to_json(c.macro)},
          {"pico", detail::bs_config_to_json(c.pico)},
          {"coverage_radius", c.coverage_radius},
          {"macro_interference_includes_picos", c.macro_interference_includes_picos},
          {"weight_set", c.weight_set},
          {"algorithms", c.algorithms},
          {"dual", {{"theta", c.dual.theta}, {"gamma", c.dual.gamma}, {"tol", c.dual.tol}, {"max_iter", c.dual.max_iter}}},
          {"price_game",
           {{"epsilon", c.price_game.epsilon},
            {"max_rounds", c.price_game.max_rounds},
            {"evaluation", c.price_game.form == EvaluationForm::log_rate ? "log" : "literal"}}},
          {"macro_biases", c.macro_biases},
          {"trials", c.trials},
          {"seed", c.seed},
          {"record_runtime", c.record_runtime}};
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return config_from_json(nlohmann::json::parse(in));
}

// ---------------------------------------------------------------------------
// Scenario generation
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent per-trial stream seed.
inline std::uint64_t trial_seed(std::uint64_t base, std::size_t trial_index) {
  return splitmix64(base ^ splitmix64(0x7472696cULL + trial_index));
}

/// RNG for small-scale fading, derived from the scenario's own seed.
inline std::mt19937_64 channel_rng(const Scenario& s) { return std::mt19937_64(splitmix64(s.seed ^ 0x6368616eULL)); }

/// Macro at the area center; picos, then users, uniform in the area. Users are
/// drawn last and sequentially, so scenarios that differ only in user count
/// share their first users for a given trial.
inline Scenario generate_scenario(const ExperimentConfig& cfg, int num_users, std::size_t trial_index) {
  cfg.validate();
  if (num_users < 0) throw std::invalid_argument("generate_scenario: negative user count");
  Scenario s;
  s.area = cfg.area;
  s.coverage_radius = cfg.coverage_radius;
  s.macro_interference_includes_picos = cfg.macro_interference_includes_picos;
  s.seed = trial_seed(cfg.seed, trial_index);
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> ux(0.0, cfg.area.width), uy(0.0, cfg.area.height);
  const WeightSet weights(cfg.weight_set);
  std::uniform_int_distribution<std::size_t> pick_weight(0, weights.size() - 1);

  auto make_bs = [&](std::size_t id, BsKind kind, const BsConfig& b, Point p) {
    BaseStation bs;
    bs.id = id;
    bs.kind = kind;
    bs.position = p;
    bs.antennas = b.antennas;
    bs.load_capacity = b.load;
    bs.tx_power = dbm_to_linear(b.power_dbm);
    bs.rate_bias = b.rate_bias;
    bs.path_loss_exponent = b.path_loss_exponent;
    return bs;
  };
  s.base_stations.push_back(make_bs(0, BsKind::macro, cfg.macro, {cfg.area.width / 2.0, cfg.area.height / 2.0}));
  for (int j = 1; j < cfg.num_bs; ++j) {
    const double x = ux(rng);
    const double y = uy(rng);
    s.base_stations.push_back(make_bs(static_cast<std::size_t>(j), BsKind::pico, cfg.pico, {x, y}));
  }
  for (int k = 0; k < num_users; ++k) {
    UserTerminal u;
    u.id = static_cast<std::size_t>(k);
    u.position.x = ux(rng);
    u.position.y = uy(rng);
    u.weight = weights.values()[pick_weight(rng)];
    s.users.push_back(u);
  }
  validate(s);
  return s;
}

inline Scenario generate_scenario(const ExperimentConfig& cfg, std::size_t trial_index) {
  return generate_scenario(cfg, cfg.user_counts.front(), trial_index);
}

/// Channel draw and rate matrix for a scenario, seeded from the scenario.
inline RateMatrix scenario_rates(const Scenario& s) {
  auto rng = channel_rng(s);
  return build_rate_matrix(s, sample_channel(s, rng));
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct ExperimentRow {
  int users = 0;
  std::string algorithm;
  int trial = 0;
  double value = 0.0;
  int rounds = 0;
  std::optional<double> runtime_ms;
};

struct Aggregate {
  int users = 0;
  std::string algorithm;
  Summary summary;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;

  std::vector<double> values(int users, const std::string& algorithm) const {
    std::vector<double> v;
    for (const auto& r : rows)
      if (r.users == users && r.algorithm == algorithm) v.push_back(r.value);
    return v;
  }

  /// Per (users, algorithm) aggregates, in first-appearance order.
  std::vector<Aggregate> aggregates() const {
    std::vector<Aggregate> out;
    std::map<std::pair<int, std::string>, bool> seen;
    for (const auto& r : rows) {
      if (seen[{r.users, r.algorithm}]) continue;
      seen[{r.users, r.algorithm}] = true;
      const auto v = values(r.users, r.algorithm);
      out.push_back({r.users, r.algorithm, summarize(v)});
    }
    return out;
  }
};

class ValidationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Shortest round-trip decimal form; identical doubles always print identically.
inline std::string format_number(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

/// Quotes a CSV field when it contains a delimiter, quote or newline.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline void write_result_csv(std::ostream& out, const ExperimentResult& r) {
  out << "K,algorithm,trial,value,rounds,runtime_ms\n";
  for (const auto& row : r.rows) {
    out << row.users << ',' << csv_field(row.algorithm) << ',' << row.trial << ',' << format_number(row.value) << ','
        << row.rounds << ',';
    if (row.runtime_ms) out << format_number(*row.runtime_ms);
    out << '\n';
  }
}

inline void write_result_jsonl(std::ostream& out, const ExperimentResult& r) {
  for (const auto& row : r.rows) {
    nlohmann::json j{{"K", row.users}, {"algorithm", row.algorithm}, {"trial", row.trial},
                     {"value", row.value}, {"rounds", row.rounds}};
    j["runtime_ms"] = row.runtime_ms ? nlohmann::json(*row.runtime_ms) : nlohmann::json(nullptr);
    out << j.dump() << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const ExperimentResult& r) {
  out << "K,algorithm,n,mean,ci95_half_width\n";
  for (const auto& a : r.aggregates())
    out << a.users << ',' << csv_field(a.algorithm) << ',' << a.summary.n << ',' << format_number(a.summary.mean) << ','
        << format_number(a.summary.half_width) << '\n';
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

namespace detail {

inline bool selected(const ExperimentConfig& cfg, const std::string& name) {
  if (cfg.algorithms.empty()) return true;
  return std::find(cfg.algorithms.begin(), cfg.algorithms.end(), name) != cfg.algorithms.end();
}

class RowRecorder {
 public:
  RowRecorder(const ExperimentConfig& cfg, ExperimentResult& out, int users, int trial)
      : cfg_(cfg), out_(out), users_(users), trial_(trial) {}

  /// Runs `fn` (returning {value, rounds}) when the algorithm is selected.
  template <typename Fn>
  std::optional<double> run(const std::string& name, Fn&& fn) {
    if (!selected(cfg_, name)) return std::nullopt;
    const auto start = std::chrono::steady_clock::now();
    const auto [value, rounds] = fn();
    const auto stop = std::chrono::steady_clock::now();
    ExperimentRow row{users_, name, trial_, value, rounds, std::nullopt};
    if (cfg_.record_runtime) row.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    out_.rows.push_back(std::move(row));
    return value;
  }

 private:
  const ExperimentConfig& cfg_;
  ExperimentResult& out_;
  int users_;
  int trial_;
};

inline void require(bool ok, const std::string& what, int users, int trial) {
  if (!ok)
    throw ValidationError("invariant violated (" + what + ") at K=" + std::to_string(users) +
                          " trial=" + std::to_string(trial));
}

inline constexpr double kDominanceTol = 1e-9;

}  // namespace detail

/// Sum-rate and proportional-fairness solvers against the greedy baselines.
/// Algorithms: sumrate_opt, greedy1, greedy2, propfair_opt, greedy1_log,
/// greedy2_log, ub1.
inline ExperimentResult run_centralized_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  for (int users : cfg.user_counts) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const Scenario s = generate_scenario(cfg, users, static_cast<std::size_t>(trial));
      const RateMatrix c = scenario_rates(s);
      const auto loads = s.capacities();
      const auto w = rate_weights(c, loads);
      const auto lw = log_rate_weights(c, loads);
      detail::RowRecorder rec(cfg, out, users, trial);
      auto checked = [&](const Assignment& a, const WeightMatrix& wm) {
        detail::require(assignment_violation(a, wm, AssociationMode::optional).empty(), "feasible assignment", users,
                        trial);
        return a;
      };

      const auto opt = rec.run("sumrate_opt", [&] { return std::pair{utility(checked(sum_rate_optimal(c, loads).assignment, w), c, 0), 0}; });
      const auto g1 = rec.run("greedy1", [&] { return std::pair{utility(checked(greedy_global(w), w), c, 0), 0}; });
      const auto g2 = rec.run("greedy2", [&] { return std::pair{utility(checked(greedy_per_bs(w), w), c, 0), 0}; });
      const auto pf = rec.run("propfair_opt", [&] { return std::pair{utility(checked(propfair_optimal(c, loads).assignment, lw), c, 1), 0}; });
      const auto g1l = rec.run("greedy1_log", [&] {
        return std::pair{utility(checked(greedy_global(lw, GreedyRule::positive_only), lw), c, 1), 0};
      });
      const auto g2l = rec.run("greedy2_log", [&] {
        return std::pair{utility(checked(greedy_per_bs(lw, GreedyRule::positive_only), lw), c, 1), 0};
      });
      const auto bound = rec.run("ub1", [&] { return std::pair{ub1(c), 0}; });

      const double tol = detail::kDominanceTol;
      if (opt && g1) detail::require(*opt >= *g1 - tol * std::max(1.0, *opt), "sumrate_opt >= greedy1", users, trial);
      if (opt && g2) detail::require(*opt >= *g2 - tol * std::max(1.0, *opt), "sumrate_opt >= greedy2", users, trial);
      if (pf && g1l) detail::require(*pf >= *g1l - tol * std::max(1.0, *pf), "propfair_opt >= greedy1_log", users, trial);
      if (pf && g2l) detail::require(*pf >= *g2l - tol * std::max(1.0, *pf), "propfair_opt >= greedy2_log", users, trial);
      if (pf && bound) detail::require(*pf <= *bound + tol * std::max(1.0, *bound), "propfair_opt <= ub1", users, trial);
    }
  }
  return out;
}

/// Joint resource allocation: dual decomposition against greedy 4/5, plus the
/// every-user-connected variant whenever loads and candidates admit it.
/// Algorithms: joint_dual, greedy4, greedy5, joint_dual_mandatory.
inline ExperimentResult run_joint_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  for (int users : cfg.user_counts) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const Scenario s = generate_scenario(cfg, users, static_cast<std::size_t>(trial));
      const RateMatrix c = scenario_rates(s);
      const auto loads = s.capacities();
      DualOptions opt = cfg.dual;
      opt.record_trace = false;
      detail::RowRecorder rec(cfg, out, users, trial);

      const auto dual = rec.run("joint_dual", [&] {
        const auto r = dual_decomposition(c, loads, opt);
        detail::require(r.feasible, "joint_dual feasible", users, trial);
        return std::pair{r.utility, r.iterations};
      });
      rec.run("greedy4", [&] { return std::pair{greedy_joint_global(c).value, 0}; });
      rec.run("greedy5", [&] { return std::pair{greedy_joint_per_bs(c).value, 0}; });
      if (mandatory_feasible(c, loads)) {
        const auto mand = rec.run("joint_dual_mandatory", [&] {
          const auto r = dual_decomposition_mandatory(c, loads, opt);
          detail::require(r.feasible, "joint_dual_mandatory feasible", users, trial);
          return std::pair{r.utility, r.iterations};
        });
        if (dual && mand)
          detail::require(*dual >= *mand - detail::kDominanceTol * std::max(1.0, std::abs(*dual)),
                          "optional >= mandatory", users, trial);
      }
    }
  }
  return out;
}

/// Both game protocols per trial. Algorithms: price_game (provider utility),
/// price_game_users (users' utility at the final prices), bidding_game.
/// `rounds` is the probing round count for the price game and the total
/// round count for the bidding game.
inline ExperimentResult run_game_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const WeightSet ws(cfg.weight_set);
  ExperimentResult out;
  for (int users : cfg.user_counts) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const Scenario s = generate_scenario(cfg, users, static_cast<std::size_t>(trial));
      const RateMatrix c = scenario_rates(s);
      const auto loads = s.capacities();
      const auto weights = s.weights();
      detail::RowRecorder rec(cfg, out, users, trial);
      std::optional<PriceGameResult> price;
      rec.run("price_game", [&] {
        price = price_game_run(c, weights, loads, ws, cfg.price_game);
        detail::require(price->converged, "price game converged", users, trial);
        return std::pair{price->provider_utility, price->probing_rounds};
      });
      rec.run("price_game_users", [&] {
        if (!price) price = price_game_run(c, weights, loads, ws, cfg.price_game);
        double sum = 0.0;
        for (double u : price->user_utilities) sum += u;
        return std::pair{sum, price->probing_rounds};
      });
      rec.run("bidding_game", [&] {
        const auto b = bidding_game_run(c, weights, loads);
        detail::require(b.converged, "bidding game converged", users, trial);
        detail::require(verify_stability(b.matching, b.bid_values, loads).stable, "bidding outcome stable", users,
                        trial);
        return std::pair{b.provider_utility, b.rounds};
      });
    }
  }
  return out;
}

/// Bidding game with the macro rate scaled by each configured bias, on paired
/// seeds (same placement and fading in every arm). Algorithm names are
/// "bidding_bias_<bias>".
inline ExperimentResult run_bias_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  for (int users : cfg.user_counts) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const Scenario base = generate_scenario(cfg, users, static_cast<std::size_t>(trial));
      for (double bias : cfg.macro_biases) {
        Scenario s = base;
        s.base_stations[s.macro_index()].rate_bias = bias;
        validate(s);
        const RateMatrix c = scenario_rates(s);
        const auto loads = s.capacities();
        detail::RowRecorder rec(cfg, out, users, trial);
        rec.run("bidding_bias_" + format_number(bias), [&] {
          const auto b = bidding_game_run(c, s.weights(), loads);
          detail::require(b.converged, "bidding game converged", users, trial);
          return std::pair{b.provider_utility, b.rounds};
        });
      }
    }
  }
  return out;
}

}  // namespace hetnet
