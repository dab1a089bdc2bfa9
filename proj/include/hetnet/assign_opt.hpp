#pragma once

// Capacity-constrained user association: exact max-weight solver, brute-force
// oracle, sum-rate and proportional-fairness wrappers, and greedy baselines.
//
// The association LP has a totally unimodular constraint matrix (it is a
// bipartite transportation polytope), so its vertex optimum is integral. The
// exact solver realizes it as a min-cost flow
//     source -> user (cap 1) -> BS (cap 1, cost -w) -> sink (cap L_j)
// solved by successive shortest paths; integer capacities keep every arc flow
// integral.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <stdexcept>
#include <vector>

#include "hetnet/assignment.hpp"
#include "hetnet/enumerate.hpp"
#include "hetnet/min_cost_flow.hpp"
#include "hetnet/model.hpp"

namespace hetnet {

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Solution {
  Assignment assignment;
  double value = 0.0;
};

inline Assignment solve_max_weight(const WeightMatrix& w, AssociationMode mode) {
  w.check();
  const std::size_t K = w.num_users();
  const std::size_t J = w.num_bs();
  if (mode == AssociationMode::mandatory) {
    long long total = 0;
    for (int c : w.capacities) total += c;
    if (total < static_cast<long long>(K)) throw InfeasibleError("mandatory association needs sum of loads >= users");
  }

  const std::size_t source = K + J;
  const std::size_t sink = K + J + 1;
  MinCostFlow<double> net(K + J + 2);
  for (std::size_t k = 0; k < K; ++k) net.add_edge(source, k, 1, 0.0);
  struct Link {
    std::size_t user, bs, edge;
  };
  std::vector<Link> links;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < J; ++j)
      if (w.permitted(k, j)) links.push_back({k, j, net.add_edge(k, K + j, 1, -w.w(k, j))});
  for (std::size_t j = 0; j < J; ++j) net.add_edge(K + j, sink, w.capacities[j], 0.0);

  const bool optional = mode == AssociationMode::optional;
  const auto result = net.solve(source, sink, static_cast<int>(K), optional);
  if (!optional && result.flow < static_cast<int>(K))
    throw InfeasibleError("mandatory association infeasible under candidacy and load constraints");

  Assignment a(K, J);
  for (const Link& l : links) {
    const int f = net.flow(l.edge);
    if (f == 0) continue;
    if (f != 1 || a.assigned(l.user)) throw std::logic_error("solve_max_weight: non-binary flow");
    a.assign(l.user, l.bs);
  }
  return a;
}

/// Exhaustive oracle over all (J+1)^K row choices; ties resolve to the
/// lexicographically smallest x.
inline Assignment brute_force_assignment(const WeightMatrix& w, AssociationMode mode) {
  w.check();
  check_oracle_size(w.num_users(), w.num_bs());
  std::optional<std::vector<std::optional<std::size_t>>> best;
  double best_value = -std::numeric_limits<double>::infinity();
  Mask allowed = w.allowed;
  for (std::size_t k = 0; k < w.num_users(); ++k)
    for (std::size_t j = 0; j < w.num_bs(); ++j) allowed(k, j) = w.permitted(k, j);

  detail::enumerate_assignments(w.num_users(), w.num_bs(), w.capacities, allowed, mode, [&](const auto& choices) {
    double v = 0.0;
    for (std::size_t k = 0; k < choices.size(); ++k)
      if (choices[k]) v += w.w(k, *choices[k]);
    if (!best || v > best_value) {
      best = choices;
      best_value = v;
    }
  });
  if (!best) throw InfeasibleError("no feasible assignment");
  return detail::to_assignment(*best, w.num_bs());
}

/// Maximizes sum_k sum_j x_kj c_kj.
inline Solution sum_rate_optimal(const RateMatrix& c, const std::vector<int>& loads) {
  Assignment a = solve_max_weight(rate_weights(c, loads), AssociationMode::optional);
  const double v = utility(a, c, 0);
  return {std::move(a), v};
}

/// Maximizes sum_k log2(eta_k) by solving the linear problem on log2 c.
/// Pairs with c <= 1 never enter: their weight is <= 0.
inline Solution propfair_optimal(const RateMatrix& c, const std::vector<int>& loads) {
  Assignment a = solve_max_weight(log_rate_weights(c, loads), AssociationMode::optional);
  const double v = utility(a, c, 1);
  return {std::move(a), v};
}

/// Upper bound on the proportional-fairness optimum: each user at its best link.
inline double ub1(const RateMatrix& c) {
  double total = 0.0;
  for (std::size_t k = 0; k < c.num_users(); ++k) {
    double best = 0.0;
    for (std::size_t j = 0; j < c.num_bs(); ++j)
      if (c.allowed(k, j) && c.rates(k, j) > 1.0) best = std::max(best, std::log2(c.rates(k, j)));
    total += best;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Greedy baselines
// ---------------------------------------------------------------------------

/// `positive_only` is the log-utility variant: stop once no remaining weight is > 0.
enum class GreedyRule { any_weight, positive_only };

/// Repeatedly takes the globally largest remaining (user, BS) weight among BSs
/// with residual load. Ties: lower user index, then lower BS index.
inline Assignment greedy_global(const WeightMatrix& w, GreedyRule rule = GreedyRule::any_weight) {
  w.check();
  const std::size_t K = w.num_users();
  const std::size_t J = w.num_bs();
  Assignment a(K, J);
  std::vector<int> residual = w.capacities;
  std::vector<unsigned char> done(K, 0);
  for (;;) {
    std::optional<std::pair<std::size_t, std::size_t>> pick;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      if (done[k]) continue;
      for (std::size_t j = 0; j < J; ++j) {
        if (residual[j] == 0 || !w.permitted(k, j)) continue;
        if (!pick || w.w(k, j) > best) {
          pick = {k, j};
          best = w.w(k, j);
        }
      }
    }
    if (!pick) break;
    if (rule == GreedyRule::positive_only && !(best > 0.0)) break;
    const auto [k, j] = *pick;
    a.assign(k, j);
    --residual[j];
    done[k] = 1;
  }
  return a;
}

/// Visits BSs in index order; each fills its load with its best remaining users.
inline Assignment greedy_per_bs(const WeightMatrix& w, GreedyRule rule = GreedyRule::any_weight) {
  w.check();
  const std::size_t K = w.num_users();
  const std::size_t J = w.num_bs();
  Assignment a(K, J);
  std::vector<unsigned char> done(K, 0);
  for (std::size_t j = 0; j < J; ++j) {
    for (int slot = 0; slot < w.capacities[j]; ++slot) {
      std::optional<std::size_t> pick;
      for (std::size_t k = 0; k < K; ++k) {
        if (done[k] || !w.permitted(k, j)) continue;
        if (!pick || w.w(k, j) > w.w(*pick, j)) pick = k;
      }
      if (!pick) break;
      if (rule == GreedyRule::positive_only && !(w.w(*pick, j) > 0.0)) break;
      a.assign(*pick, j);
      done[*pick] = 1;
    }
  }
  return a;
}

}  // namespace hetnet
