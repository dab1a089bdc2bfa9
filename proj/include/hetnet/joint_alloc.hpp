#pragma once

// Joint resource allocation and user association under log utility.
//
// For a fixed association the optimal resource split is equal sharing within
// each BS, which turns the joint problem into
//     max sum_kj x_kj (ln c_kj - ln Xi_j)   s.t.  Xi_j = sum_k x_kj <= L_j.
// dual_decomposition() prices the Xi_j coupling with multipliers lambda_j:
// users pick argmax_j (ln c_kj - lambda_j), each BS sets
// Xi_j = min{L_j, e^(lambda_j - 1)}, and lambda moves along the subgradient
// Xi_j - sum_k x_kj with step theta / (t + gamma).
//
// Everything in this module is in natural log (nats).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hetnet/assign_opt.hpp"
#include "hetnet/assignment.hpp"
#include "hetnet/enumerate.hpp"
#include "hetnet/model.hpp"
#include "json.hpp"

namespace hetnet {

struct ResourceAllocation {
  Matrix<double> beta;  // K x J shares in [0, 1]
};

/// beta_kj = x_kj / sum_k x_kj; empty BS columns stay zero.
inline ResourceAllocation equal_share_beta(const Assignment& a) {
  ResourceAllocation r{Matrix<double>(a.num_users(), a.num_bs(), 0.0)};
  const auto load = a.load();
  for (std::size_t k = 0; k < a.num_users(); ++k)
    if (auto s = a.serving(k)) r.beta(k, *s) = 1.0 / static_cast<double>(load[*s]);
  return r;
}

/// sum_kj x_kj ln(c_kj beta_kj); unassigned users contribute 0.
inline double joint_utility(const Assignment& a, const ResourceAllocation& r, const RateMatrix& c) {
  if (!r.beta.same_shape(a.num_users(), a.num_bs()) || !c.rates.same_shape(a.num_users(), a.num_bs()))
    throw std::invalid_argument("joint_utility: dimension mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < a.num_users(); ++k) {
    const auto s = a.serving(k);
    if (!s) continue;
    const double beta = r.beta(k, *s);
    if (!(beta > 0.0)) throw std::domain_error("joint_utility: served user with zero resource share");
    total += std::log(c.rates(k, *s) * beta);
  }
  return total;
}

/// Joint utility under equal sharing, computed per BS as
/// sum ln c - n ln n; shared by the solvers and the oracle.
inline double equal_share_utility(const Assignment& a, const RateMatrix& c) {
  std::vector<double> log_sum(a.num_bs(), 0.0);
  const auto load = a.load();
  for (std::size_t k = 0; k < a.num_users(); ++k)
    if (auto s = a.serving(k)) log_sum[*s] += std::log(c.rates(k, *s));
  double total = 0.0;
  for (std::size_t j = 0; j < a.num_bs(); ++j)
    if (load[j] > 0) total += log_sum[j] - load[j] * std::log(static_cast<double>(load[j]));
  return total;
}

struct JointSolution {
  Assignment assignment;
  ResourceAllocation allocation;
  double value = 0.0;
};

// ---------------------------------------------------------------------------
// Two-layer dual decomposition
// ---------------------------------------------------------------------------

struct DualOptions {
  double theta = 1.0;
  double gamma = 10.0;
  int max_iter = 5000;
  double tol = 1e-4;
  int stable_iters = 10;  // consecutive converged iterations required
  bool record_trace = true;
};

/// Multipliers and step-size state of the subgradient layer.
struct DualState {
  std::vector<double> lambda;
  std::vector<double> xi;
  int t = 0;
  double theta = 1.0;
  double gamma = 10.0;

  double step() const { return theta / (static_cast<double>(t) + gamma); }
};

struct DualIteration {
  int t = 0;
  std::vector<double> lambda;  // multipliers used for this iteration's choices
  std::vector<double> xi;
  std::vector<int> assigned_per_bs;
  double utility = 0.0;  // equal-share utility of this iteration's association
  bool feasible = false;
};

struct DualResult {
  Assignment assignment;
  ResourceAllocation allocation;
  double utility = 0.0;
  bool converged = false;
  bool feasible = false;
  int iterations = 0;
  int best_iteration = 0;  // iteration that produced the returned association (0: none)
  bool repaired = false;   // mandatory mode: no iterate met the loads, capacity-constrained repair used
  std::vector<DualIteration> trace;
};

/// Whether every user can be served within the loads, given the candidates.
inline bool mandatory_feasible(const RateMatrix& c, const std::vector<int>& loads) {
  try {
    solve_max_weight(WeightMatrix{Matrix<double>(c.num_users(), c.num_bs(), 0.0), loads, c.candidate},
                     AssociationMode::mandatory);
    return true;
  } catch (const InfeasibleError&) {
    return false;
  }
}

namespace detail {

inline DualResult run_dual(const RateMatrix& c, const std::vector<int>& loads, const DualOptions& opt,
                           AssociationMode mode) {
  if (!(opt.theta > 0.0) || !(opt.gamma > 0.0)) throw std::invalid_argument("dual_decomposition: theta, gamma > 0");
  if (opt.max_iter < 1) throw std::invalid_argument("dual_decomposition: max_iter >= 1");
  const std::size_t K = c.num_users();
  const std::size_t J = c.num_bs();
  if (loads.size() != J) throw std::invalid_argument("dual_decomposition: one load per BS required");
  for (double v : c.rates.data())
    if (!std::isfinite(v)) throw std::invalid_argument("dual_decomposition: rates must be finite");
  if (mode == AssociationMode::mandatory) {
    long long total = 0;
    for (int l : loads) total += l;
    if (total < static_cast<long long>(K)) throw InfeasibleError("mandatory association needs sum of loads >= users");
  }

  Matrix<double> log_c(K, J, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < J; ++j)
      if (c.allowed(k, j) && c.rates(k, j) > 0.0) log_c(k, j) = std::log(c.rates(k, j));

  WeightMatrix feasibility{log_c, loads, c.candidate};

  DualState state{std::vector<double>(J, 0.0), std::vector<double>(J, 0.0), 0, opt.theta, opt.gamma};
  DualResult out;
  out.assignment = Assignment(K, J);
  if (mode == AssociationMode::optional) out.feasible = true;  // the empty association, utility 0

  Assignment previous(K, J);
  Assignment current(K, J);
  int stable = 0;
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    state.t = iter;
    // Per-user best response to the BS prices.
    for (std::size_t k = 0; k < K; ++k) {
      current.clear(k);
      std::optional<std::size_t> best;
      double best_score = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < J; ++j) {
        if (log_c(k, j) == -std::numeric_limits<double>::infinity()) continue;
        const double score = log_c(k, j) - state.lambda[j];
        if (!best || score > best_score) {
          best = j;
          best_score = score;
        }
      }
      if (best && (mode == AssociationMode::mandatory || best_score >= 0.0)) current.assign(k, *best);
    }
    const auto load = current.load();

    DualIteration rec;
    rec.t = iter;
    if (opt.record_trace) rec.lambda = state.lambda;

    // Per-BS primal update of Xi and subgradient step on lambda.
    double gap = 0.0;
    const double delta = state.step();
    for (std::size_t j = 0; j < J; ++j) {
      state.xi[j] = std::min(static_cast<double>(loads[j]), std::exp(state.lambda[j] - 1.0));
      const double g = state.xi[j] - load[j];
      gap = std::max(gap, std::abs(g));
      state.lambda[j] -= delta * g;
    }

    rec.feasible = assignment_violation(current, feasibility, mode).empty();
    rec.utility = equal_share_utility(current, c);
    if (rec.feasible && (!out.feasible || rec.utility > out.utility)) {
      out.assignment = current;
      out.utility = rec.utility;
      out.feasible = true;
      out.best_iteration = iter;
    }
    if (opt.record_trace) {
      rec.xi = state.xi;
      rec.assigned_per_bs = load;
      out.trace.push_back(std::move(rec));
    }

    stable = (iter > 1 && current == previous && gap < opt.tol) ? stable + 1 : 0;
    previous = current;
    out.iterations = iter;
    if (stable >= opt.stable_iters) {
      out.converged = true;
      break;
    }
  }
  if (!out.feasible) {
    // Mandatory mode never met the loads. Users keep their scores against the
    // final multipliers, but now subject to the caps.
    Matrix<double> score = log_c;
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t j = 0; j < J; ++j) score(k, j) -= state.lambda[j];
    // Throws InfeasibleError when the candidate mask admits no full association.
    out.assignment = solve_max_weight(WeightMatrix{std::move(score), loads, c.candidate}, mode);
    out.feasible = true;
    out.repaired = true;
    out.utility = equal_share_utility(out.assignment, c);
  }
  out.allocation = equal_share_beta(out.assignment);
  return out;
}

}  // namespace detail

/// Association with sum_j x_kj <= 1. Returns the best load-feasible iterate
/// seen (the empty association when none beats it), with equal-share beta.
inline DualResult dual_decomposition(const RateMatrix& c, const std::vector<int>& loads, const DualOptions& opt = {}) {
  return detail::run_dual(c, loads, opt, AssociationMode::optional);
}

/// Variant with sum_j x_kj = 1: every user always takes its best-scoring BS.
/// If no iterate respects the loads, the result is the cap-respecting
/// assignment maximizing sum (ln c - lambda) at the final multipliers.
/// Throws InfeasibleError if sum L < K or the candidate mask leaves no
/// association that serves everyone.
inline DualResult dual_decomposition_mandatory(const RateMatrix& c, const std::vector<int>& loads,
                                               const DualOptions& opt = {}) {
  return detail::run_dual(c, loads, opt, AssociationMode::mandatory);
}

/// JSON-lines export: one record per iteration.
inline void write_dual_trace_jsonl(std::ostream& out, const std::vector<DualIteration>& trace) {
  for (const auto& it : trace) {
    nlohmann::json j{{"t", it.t},
                     {"lambda", it.lambda},
                     {"xi", it.xi},
                     {"assigned_per_bs", it.assigned_per_bs},
                     {"utility", it.utility}};
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Oracle and greedy baselines
// ---------------------------------------------------------------------------

/// Enumerates every association and applies equal sharing, which is optimal
/// for a fixed association. Ties resolve to the lexicographically smallest x.
inline JointSolution brute_force_joint(const RateMatrix& c, const std::vector<int>& loads, AssociationMode mode) {
  const std::size_t K = c.num_users();
  const std::size_t J = c.num_bs();
  check_oracle_size(K, J);
  if (loads.size() != J) throw std::invalid_argument("brute_force_joint: one load per BS required");
  Mask allowed(K, J, 0);
  Matrix<double> log_c(K, J, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < J; ++j)
      if (c.allowed(k, j) && c.rates(k, j) > 0.0) {
        allowed(k, j) = 1;
        log_c(k, j) = std::log(c.rates(k, j));
      }

  std::optional<std::vector<std::optional<std::size_t>>> best;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> log_sum(J);
  std::vector<int> count(J);
  detail::enumerate_assignments(K, J, loads, allowed, mode, [&](const auto& choices) {
    std::fill(log_sum.begin(), log_sum.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t k = 0; k < K; ++k)
      if (choices[k]) {
        log_sum[*choices[k]] += log_c(k, *choices[k]);
        ++count[*choices[k]];
      }
    double v = 0.0;
    for (std::size_t j = 0; j < J; ++j)
      if (count[j] > 0) v += log_sum[j] - count[j] * std::log(static_cast<double>(count[j]));
    if (!best || v > best_value) {
      best = choices;
      best_value = v;
    }
  });
  if (!best) throw InfeasibleError("brute_force_joint: no feasible association");
  Assignment a = detail::to_assignment(*best, J);
  ResourceAllocation r = equal_share_beta(a);
  return {std::move(a), std::move(r), best_value};
}

/// Repeatedly serves the globally best remaining pair with the BS's whole
/// resource, removing both the user and the BS, while max ln c > 0.
inline JointSolution greedy_joint_global(const RateMatrix& c) {
  const std::size_t K = c.num_users();
  const std::size_t J = c.num_bs();
  Assignment a(K, J);
  std::vector<unsigned char> user_done(K, 0), bs_done(J, 0);
  for (;;) {
    std::optional<std::pair<std::size_t, std::size_t>> pick;
    double best = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      if (user_done[k]) continue;
      for (std::size_t j = 0; j < J; ++j) {
        if (bs_done[j] || !c.allowed(k, j)) continue;
        if (c.rates(k, j) > 1.0 && (!pick || c.rates(k, j) > best)) {
          pick = {k, j};
          best = c.rates(k, j);
        }
      }
    }
    if (!pick) break;
    a.assign(pick->first, pick->second);
    user_done[pick->first] = 1;
    bs_done[pick->second] = 1;
  }
  ResourceAllocation r = equal_share_beta(a);
  const double v = joint_utility(a, r, c);
  return {std::move(a), std::move(r), v};
}

/// BSs in index order each take their single best remaining user if ln c > 0.
inline JointSolution greedy_joint_per_bs(const RateMatrix& c) {
  const std::size_t K = c.num_users();
  const std::size_t J = c.num_bs();
  Assignment a(K, J);
  std::vector<unsigned char> user_done(K, 0);
  for (std::size_t j = 0; j < J; ++j) {
    std::optional<std::size_t> pick;
    for (std::size_t k = 0; k < K; ++k) {
      if (user_done[k] || !c.allowed(k, j)) continue;
      if (!pick || c.rates(k, j) > c.rates(*pick, j)) pick = k;
    }
    if (!pick || !(c.rates(*pick, j) > 1.0)) continue;
    a.assign(*pick, j);
    user_done[*pick] = 1;
  }
  ResourceAllocation r = equal_share_beta(a);
  const double v = joint_utility(a, r, c);
  return {std::move(a), std::move(r), v};
}

}  // namespace hetnet
