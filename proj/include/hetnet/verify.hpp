#pragma once

// Random small instances and the oracle / invariant checks run by
// `verify --suite small-oracle` and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hetnet/assign_opt.hpp"
#include "hetnet/games.hpp"
#include "hetnet/joint_alloc.hpp"

namespace hetnet {

struct InstanceLimits {
  std::size_t min_users = 1;
  std::size_t max_users = 10;
  std::size_t max_bss = 4;
  int min_capacity = 0;
  int max_capacity = 3;
  double pico_candidate_prob = 0.7;  // BS 0 is a candidate for everyone
  double min_rate = 0.2;
  double max_rate = 20.0;
};

struct SmallInstance {
  RateMatrix c;
  std::vector<int> loads;
  std::vector<double> weights;
};

inline SmallInstance random_instance(std::mt19937_64& rng, const InstanceLimits& lim,
                                     const WeightSet& ws = WeightSet::uniform_grid()) {
  std::uniform_int_distribution<std::size_t> users(lim.min_users, lim.max_users);
  std::uniform_int_distribution<std::size_t> bss(1, lim.max_bss);
  std::uniform_int_distribution<int> cap(lim.min_capacity, lim.max_capacity);
  std::uniform_real_distribution<double> rate(lim.min_rate, lim.max_rate);
  std::bernoulli_distribution candidate(lim.pico_candidate_prob);
  std::uniform_int_distribution<std::size_t> weight(0, ws.size() - 1);

  const std::size_t K = users(rng);
  const std::size_t J = bss(rng);
  SmallInstance inst;
  inst.c = RateMatrix{Matrix<double>(K, J, 0.0), Mask(K, J, 0)};
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < J; ++j) {
      inst.c.rates(k, j) = rate(rng);
      inst.c.candidate(k, j) = j == 0 || candidate(rng);
    }
  for (std::size_t j = 0; j < J; ++j) inst.loads.push_back(cap(rng));
  for (std::size_t k = 0; k < K; ++k) inst.weights.push_back(ws.values()[weight(rng)]);
  return inst;
}

struct CheckOutcome {
  explicit CheckOutcome(std::string check_name) : name(std::move(check_name)) {}

  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool passed() const { return cases > 0 && failures == 0; }

  void fail(std::size_t index, const std::string& why) {
    if (failures++ == 0) first_failure = "instance " + std::to_string(index) + ": " + why;
  }
};

namespace detail {

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline std::string num(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

}  // namespace detail

/// Max-weight solver vs. exhaustive oracle, sum-rate and log-rate weights in
/// both association modes; checks value, capacity/row feasibility.
inline CheckOutcome check_oracle_exactness(std::uint64_t seed, std::size_t count, double tol = 1e-9) {
  CheckOutcome out("oracle exactness");
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto inst = random_instance(rng, {});
    ++out.cases;
    for (const auto& w : {rate_weights(inst.c, inst.loads), log_rate_weights(inst.c, inst.loads)}) {
      for (auto mode : {AssociationMode::optional, AssociationMode::mandatory}) {
        std::optional<Assignment> fast, slow;
        try {
          fast = solve_max_weight(w, mode);
        } catch (const InfeasibleError&) {
        }
        try {
          slow = brute_force_assignment(w, mode);
        } catch (const InfeasibleError&) {
        }
        if (fast.has_value() != slow.has_value()) {
          out.fail(i, "feasibility disagrees with oracle");
          continue;
        }
        if (!fast) continue;
        if (const auto v = assignment_violation(*fast, w, mode); !v.empty()) out.fail(i, v);
        const double fv = assignment_value(*fast, w.w);
        const double sv = assignment_value(*slow, w.w);
        if (!detail::close(fv, sv, tol)) out.fail(i, "value " + detail::num(fv) + " vs oracle " + detail::num(sv));
      }
    }
  }
  return out;
}

/// Every flow-derived x entry is 0 or 1 and each row sums to at most 1.
inline CheckOutcome check_integrality(std::uint64_t seed, std::size_t count) {
  CheckOutcome out("integrality");
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto inst = random_instance(rng, {});
    ++out.cases;
    for (const auto& w : {rate_weights(inst.c, inst.loads), log_rate_weights(inst.c, inst.loads)}) {
      try {
        const auto x = solve_max_weight(w, AssociationMode::optional).to_matrix();
        for (std::size_t k = 0; k < x.rows(); ++k) {
          int row = 0;
          for (int v : x.row(k)) {
            if (v != 0 && v != 1) out.fail(i, "non-binary entry");
            row += v;
          }
          if (row > 1) out.fail(i, "row sum > 1");
        }
      } catch (const std::logic_error& e) {
        out.fail(i, e.what());
      }
    }
  }
  return out;
}

/// On the proportional-fairness optimum, sum log2(eta_k) equals the linear
/// objective sum x log2 c, and never exceeds the per-user upper bound.
inline CheckOutcome check_propfair_equivalence(std::uint64_t seed, std::size_t count, double tol = 1e-9) {
  CheckOutcome out("proportional-fairness equivalence");
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto inst = random_instance(rng, {});
    ++out.cases;
    const auto sol = propfair_optimal(inst.c, inst.loads);
    double nonlinear = 0.0;
    for (std::size_t k = 0; k < inst.c.num_users(); ++k) {
      double eta = 0.0;
      for (std::size_t j = 0; j < inst.c.num_bs(); ++j) eta += sol.assignment.x(k, j) * inst.c.rates(k, j);
      if (eta > 0.0) nonlinear += std::log2(eta);
    }
    const double linear = assignment_value(sol.assignment, log_rate_weights(inst.c, inst.loads).w);
    if (!detail::close(nonlinear, linear, tol))
      out.fail(i, "log of sum " + detail::num(nonlinear) + " vs sum of logs " + detail::num(linear));
    const double bound = ub1(inst.c);
    if (linear > bound + tol) out.fail(i, "optimum " + detail::num(linear) + " above bound " + detail::num(bound));
  }
  return out;
}

inline InstanceLimits joint_limits() {
  InstanceLimits lim;
  lim.max_users = 8;
  lim.max_bss = 3;
  lim.min_capacity = 1;
  return lim;
}

/// Dual decomposition vs. exhaustive joint oracle (optional mode); the
/// association must be integral and beta the equal share.
inline CheckOutcome check_joint_oracle(std::uint64_t seed, std::size_t count, double tol = 1e-3,
                                       const DualOptions& opt = {1.0, 10.0, 5000, 1e-4, 10, false}) {
  CheckOutcome out("joint allocation oracle");
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto inst = random_instance(rng, joint_limits());
    ++out.cases;
    const auto dual = dual_decomposition(inst.c, inst.loads, opt);
    const auto best = brute_force_joint(inst.c, inst.loads, AssociationMode::optional);
    const auto w = log_rate_weights(inst.c, inst.loads);
    if (!dual.feasible || !assignment_violation(dual.assignment, w, AssociationMode::optional).empty())
      out.fail(i, "infeasible association");
    if (!detail::close(dual.utility, best.value, tol))
      out.fail(i, "dual " + detail::num(dual.utility) + " vs oracle " + detail::num(best.value));
    if (dual.allocation.beta != equal_share_beta(dual.assignment).beta) out.fail(i, "beta is not the equal share");
    if (!detail::close(joint_utility(dual.assignment, dual.allocation, inst.c), dual.utility, 1e-9))
      out.fail(i, "reported utility does not match the allocation");
  }
  return out;
}

/// Optional-mode value >= mandatory-mode value wherever mandatory is feasible:
/// exact joint oracle, dual decomposition, and the sum-rate / log-rate solvers.
inline CheckOutcome check_optional_dominates(std::uint64_t seed, std::size_t count,
                                             const DualOptions& opt = {1.0, 10.0, 5000, 1e-4, 10, false}) {
  CheckOutcome out("optional dominates mandatory");
  std::mt19937_64 rng(seed);
  constexpr double tol = 1e-9;
  for (std::size_t i = 0; i < count; ++i) {
    const auto inst = random_instance(rng, joint_limits());
    ++out.cases;
    try {
      const double opt_v = brute_force_joint(inst.c, inst.loads, AssociationMode::optional).value;
      const double man_v = brute_force_joint(inst.c, inst.loads, AssociationMode::mandatory).value;
      if (opt_v < man_v - tol) out.fail(i, "joint oracle: optional below mandatory");
    } catch (const InfeasibleError&) {
    }
    try {
      const auto man = dual_decomposition_mandatory(inst.c, inst.loads, opt);
      const auto op = dual_decomposition(inst.c, inst.loads, opt);
      if (man.feasible && op.utility < man.utility - tol) out.fail(i, "dual: optional below mandatory");
    } catch (const InfeasibleError&) {
    }
    for (const auto& w : {rate_weights(inst.c, inst.loads), log_rate_weights(inst.c, inst.loads)}) {
      try {
        const double man_v = assignment_value(solve_max_weight(w, AssociationMode::mandatory), w.w);
        const double opt_v = assignment_value(solve_max_weight(w, AssociationMode::optional), w.w);
        if (opt_v < man_v - tol) out.fail(i, "max-weight: optional below mandatory");
      } catch (const InfeasibleError&) {
      }
    }
  }
  return out;
}

inline int ceil_log2(std::size_t n) {
  int r = 0;
  while ((std::size_t{1} << r) < n) ++r;
  return r;
}

/// Price game on small instances: probing bound, zero surplus for served
/// users, provider utility equal to the max-weight optimum on V, and NE.
inline CheckOutcome check_price_game(std::uint64_t seed, std::size_t count,
                                     const WeightSet& ws = WeightSet::uniform_grid(), double tol = 1e-9) {
  CheckOutcome out("price game equilibrium");
  std::mt19937_64 rng(seed);
  InstanceLimits lim;
  lim.max_users = 6;
  lim.max_bss = 3;
  lim.min_capacity = 1;
  const int bound = ceil_log2(ws.size()) + 2;
  for (std::size_t i = 0; i < count; ++i) {
    const auto inst = random_instance(rng, lim, ws);
    ++out.cases;
    const auto r = price_game_run(inst.c, inst.weights, inst.loads, ws);
    if (!r.converged) {
      out.fail(i, "did not converge");
      continue;
    }
    if (r.probing_rounds > bound) out.fail(i, "probing rounds " + std::to_string(r.probing_rounds));
    for (std::size_t k = 0; k < inst.c.num_users(); ++k)
      if (r.assignment.assigned(k) && std::abs(r.user_utilities[k]) > tol)
        out.fail(i, "served user " + std::to_string(k) + " keeps utility " + detail::num(r.user_utilities[k]));
    const WeightMatrix v{r.valuation, inst.loads, inst.c.candidate};
    const double best = assignment_value(brute_force_assignment(v, AssociationMode::optional), v.w);
    if (!detail::close(r.provider_utility, best, tol * std::max(1.0, std::abs(best))))
      out.fail(i, "provider " + detail::num(r.provider_utility) + " vs optimum " + detail::num(best));
    if (!verify_ne(r.prices, r.assignment, inst.c, inst.weights, inst.loads).is_ne) out.fail(i, "not an equilibrium");
  }
  return out;
}

/// Bidding game: round bound K*J, stability, nonincreasing user bids,
/// nondecreasing acceptance thresholds and provider utility.
inline CheckOutcome check_bidding_game(std::uint64_t seed, std::size_t count) {
  CheckOutcome out("bidding game stability");
  std::mt19937_64 rng(seed);
  InstanceLimits lim;
  lim.min_users = 2;  // a single user with one BS still needs the closing empty round
  lim.max_users = 12;
  lim.max_bss = 4;
  lim.min_capacity = 1;
  for (std::size_t i = 0; i < count; ++i) {
    const auto inst = random_instance(rng, lim);
    ++out.cases;
    const std::size_t K = inst.c.num_users();
    const std::size_t J = inst.c.num_bs();
    const auto r = bidding_game_run(inst.c, inst.weights, inst.loads);
    if (!r.converged || r.rounds > static_cast<int>(K * J)) out.fail(i, "rounds " + std::to_string(r.rounds));
    if (!verify_stability(r.matching, r.bid_values, inst.loads).stable) out.fail(i, "blocking pair");
    std::vector<std::optional<double>> last_bid(K);
    for (std::size_t t = 0; t < r.trace.rounds.size(); ++t) {
      const auto& round = r.trace.rounds[t];
      for (std::size_t k = 0; k < K; ++k) {
        const auto& b = round.user_bids[k];
        if (!b) continue;
        if (last_bid[k] && *b > *last_bid[k]) out.fail(i, "user bid increased");
        last_bid[k] = b;
      }
      if (t == 0) continue;
      const auto& prev = r.trace.rounds[t - 1];
      for (std::size_t j = 0; j < J; ++j)
        if (round.thresholds[j] < prev.thresholds[j]) out.fail(i, "threshold decreased");
      if (round.provider_utility < prev.provider_utility) out.fail(i, "provider utility decreased");
    }
  }
  return out;
}

/// The suite behind `verify --suite small-oracle`.
inline std::vector<CheckOutcome> run_small_oracle_suite(std::uint64_t seed, std::size_t count = 200) {
  return {check_oracle_exactness(seed, count),
          check_integrality(seed, count),
          check_propfair_equivalence(seed, count),
          check_joint_oracle(seed + 1, std::max<std::size_t>(count / 4, 1)),
          check_optional_dominates(seed + 2, std::max<std::size_t>(count / 4, 1)),
          check_price_game(seed + 3, count),
          check_bidding_game(seed + 4, count)};
}

}  // namespace hetnet
