#pragma once

// Distributed association as repeated games between the service provider and
// the users.
//
//  * Price game: the provider binary-searches each user's weight omega_k by
//    probing prices p_kj = max{w_hat log2 c_kj, 0}, then solves the max-weight
//    association on the evaluation matrix V and prices selected pairs at their
//    evaluation (everything else at evaluation + epsilon).
//  * Bidding game: users bid max{omega_k log2 c_kj, 0} to their best BS not yet
//    rejecting them; each BS holds its top L_j bids (deferred acceptance).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetnet/assign_opt.hpp"
#include "hetnet/assignment.hpp"
#include "hetnet/model.hpp"
#include "json.hpp"

namespace hetnet {

inline constexpr double kInfPrice = std::numeric_limits<double>::infinity();

/// Finite set of admissible user weights.
class WeightSet {
 public:
  explicit WeightSet(std::vector<double> values) : values_(std::move(values)) {
    std::sort(values_.begin(), values_.end());
    values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
    if (values_.empty()) throw std::invalid_argument("WeightSet: empty");
    if (!(values_.front() > 0.0)) throw std::invalid_argument("WeightSet: weights must be positive");
  }

  /// {0.5, 1.0, ..., 10.0}
  static WeightSet uniform_grid(double step = 0.5, std::size_t count = 20) {
    std::vector<double> v;
    for (std::size_t i = 1; i <= count; ++i) v.push_back(step * static_cast<double>(i));
    return WeightSet(std::move(v));
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double max() const { return values_.back(); }

  /// Smallest gap between consecutive members; for a singleton, its distance to 0.
  double resolution() const {
    double gap = values_.front();
    for (std::size_t i = 1; i < values_.size(); ++i) gap = std::min(gap, values_[i] - values_[i - 1]);
    return gap;
  }

  bool contains(double w) const { return std::binary_search(values_.begin(), values_.end(), w); }

  /// The member in [lo, hi), if any.
  std::optional<double> member_in(double lo, double hi) const {
    auto it = std::lower_bound(values_.begin(), values_.end(), lo);
    if (it != values_.end() && *it < hi) return *it;
    return std::nullopt;
  }

 private:
  std::vector<double> values_;
};

/// omega * log2 c, the user's valuation of a link (-inf for c = 0).
inline double evaluation(double omega, double rate) {
  return rate > 0.0 ? omega * std::log2(rate) : -std::numeric_limits<double>::infinity();
}

/// Best response to posted prices: j* = argmax (omega log2 c_j - p_j); connect
/// iff omega log2 c_j* >= p_j*. Infinite prices mark unavailable links.
/// Ties go to the lower BS index.
inline std::optional<std::size_t> user_best_response(std::span<const double> prices, std::span<const double> rates,
                                                     double omega) {
  if (prices.size() != rates.size()) throw std::invalid_argument("user_best_response: size mismatch");
  std::optional<std::size_t> best;
  double best_surplus = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < prices.size(); ++j) {
    if (prices[j] == kInfPrice) continue;
    const double surplus = evaluation(omega, rates[j]) - prices[j];
    if (!best || surplus > best_surplus) {
      best = j;
      best_surplus = surplus;
    }
  }
  if (best && best_surplus >= 0.0) return best;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

struct GameRound {
  int round = 0;
  std::string phase;                // "probe" / "final" (price game) or "bid"
  Matrix<double> prices_or_bids;    // prices posted, or bids outstanding
  std::vector<std::optional<std::size_t>> connections;
  double provider_utility = 0.0;
  double user_utility_sum = 0.0;
  std::vector<std::vector<std::size_t>> waiting_lists;  // bidding game only
  std::vector<int> capacity_violations;                 // per-BS excess load
  // Price game bracket after this round's feedback.
  std::vector<double> omega_lower, omega_upper, omega_hat;
  // Bidding game: each user's outstanding bid, and each BS's acceptance
  // threshold (L_j-th highest held bid, -inf while a slot is vacant).
  std::vector<std::optional<double>> user_bids;
  std::vector<double> thresholds;
};

struct GameTrace {
  std::vector<GameRound> rounds;
};

/// FNV-1a over the IEEE-754 bit patterns; stable for regression diffs.
inline std::string matrix_digest(const Matrix<double>& m) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(m.rows());
  mix(m.cols());
  for (double v : m.data()) mix(std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace detail

/// JSON lines, one record per round. `verbose` adds the full price/bid matrix
/// and the per-round bracket/threshold details.
inline void write_game_trace_jsonl(std::ostream& out, const GameTrace& trace, bool verbose = false) {
  for (const auto& r : trace.rounds) {
    nlohmann::json j;
    j["round"] = r.round;
    j["phase"] = r.phase;
    j["prices_or_bids_digest"] = matrix_digest(r.prices_or_bids);
    auto& conn = j["connections"] = nlohmann::json::array();
    for (const auto& c : r.connections) conn.push_back(c ? nlohmann::json(*c) : nlohmann::json(nullptr));
    j["provider_utility"] = r.provider_utility;
    j["user_utility_sum"] = r.user_utility_sum;
    j["waiting_lists"] = r.waiting_lists;
    if (!r.capacity_violations.empty()) j["capacity_violations"] = r.capacity_violations;
    if (verbose) {
      auto& m = j["prices_or_bids"] = nlohmann::json::array();
      for (std::size_t k = 0; k < r.prices_or_bids.rows(); ++k) {
        auto row = nlohmann::json::array();
        for (double v : r.prices_or_bids.row(k)) row.push_back(detail::finite_or_null(v));
        m.push_back(std::move(row));
      }
      if (!r.omega_hat.empty()) {
        j["omega_lower"] = r.omega_lower;
        j["omega_upper"] = r.omega_upper;
        j["omega_hat"] = r.omega_hat;
      }
      if (!r.thresholds.empty()) {
        auto& t = j["thresholds"] = nlohmann::json::array();
        for (double v : r.thresholds) t.push_back(detail::finite_or_null(v));
        auto& b = j["user_bids"] = nlohmann::json::array();
        for (const auto& v : r.user_bids) b.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
      }
    }
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Price game
// ---------------------------------------------------------------------------

/// How the provider turns an estimated weight into a link valuation.
/// `log_rate` (omega log2 c) matches the users' utility; `literal_rate`
/// (omega c) is kept only for comparison runs.
enum class EvaluationForm { log_rate, literal_rate };

struct PriceGameOptions {
  double epsilon = 1e-6;
  int max_rounds = 64;
  EvaluationForm form = EvaluationForm::log_rate;
};

struct PriceGameState {
  int round = 0;
  std::vector<double> omega_upper, omega_lower, omega_hat;
  Matrix<double> prices;
  std::vector<std::optional<std::size_t>> feedback;
};

struct PriceGameResult {
  Matrix<double> prices;  // final prices; +inf on non-candidate pairs
  Assignment assignment;  // users' responses to the final prices
  Assignment selection;   // provider's max-weight selection on V
  Matrix<double> valuation;
  std::vector<double> estimated_weights;
  GameTrace trace;
  int probing_rounds = 0;
  bool converged = false;
  double provider_utility = 0.0;
  std::vector<double> user_utilities;
};

namespace detail {

struct RoundOutcome {
  std::vector<std::optional<std::size_t>> choice;
  double provider = 0.0;
  double users = 0.0;
  std::vector<int> violations;
};

inline RoundOutcome respond(const Matrix<double>& prices, const RateMatrix& c, const std::vector<double>& weights,
                            const std::vector<int>& loads) {
  RoundOutcome o;
  o.choice.resize(c.num_users());
  std::vector<int> load(c.num_bs(), 0);
  for (std::size_t k = 0; k < c.num_users(); ++k) {
    o.choice[k] = user_best_response(prices.row(k), c.rates.row(k), weights[k]);
    if (const auto j = o.choice[k]) {
      o.provider += prices(k, *j);
      o.users += evaluation(weights[k], c.rates(k, *j)) - prices(k, *j);
      ++load[*j];
    }
  }
  o.violations.resize(c.num_bs());
  for (std::size_t j = 0; j < c.num_bs(); ++j) o.violations[j] = std::max(0, load[j] - loads[j]);
  return o;
}

inline void check_game_inputs(const RateMatrix& c, const std::vector<double>& weights, const std::vector<int>& loads) {
  if (weights.size() != c.num_users()) throw std::invalid_argument("game: one weight per user required");
  if (loads.size() != c.num_bs()) throw std::invalid_argument("game: one load per BS required");
  for (double v : c.rates.data())
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("game: rates must be finite and >= 0");
}

}  // namespace detail

/// Runs the provider's binary search on every user's weight, then posts the
/// optimal prices. `true_weights` drive the simulated users only; the
/// provider sees nothing but their connect/stay-out feedback.
inline PriceGameResult price_game_run(const RateMatrix& c, const std::vector<double>& true_weights,
                                      const std::vector<int>& loads, const WeightSet& weight_set,
                                      const PriceGameOptions& opt = {}) {
  detail::check_game_inputs(c, true_weights, loads);
  if (!(opt.epsilon > 0.0)) throw std::invalid_argument("price_game_run: epsilon must be > 0");
  const std::size_t K = c.num_users();
  const std::size_t J = c.num_bs();
  const double resolution = weight_set.resolution();

  PriceGameState st;
  st.omega_upper.assign(K, weight_set.max());
  st.omega_lower.assign(K, 0.0);
  st.omega_hat.assign(K, 0.0);
  st.prices = Matrix<double>(K, J, kInfPrice);
  std::vector<unsigned char> resolved(K, 0);
  auto bracket_closed = [&](std::size_t k) { return st.omega_upper[k] - st.omega_lower[k] < resolution; };
  for (std::size_t k = 0; k < K; ++k) resolved[k] = bracket_closed(k);

  // The weight lies in [lower, upper), or in [lower, W_M] while upper was never lowered.
  auto estimate = [&](std::size_t k) {
    if (const auto m = weight_set.member_in(st.omega_lower[k], st.omega_upper[k])) return *m;
    if (st.omega_upper[k] == weight_set.max()) return weight_set.max();
    return st.omega_lower[k];
  };
  auto post_prices = [&](std::size_t k, double w_hat) {
    for (std::size_t j = 0; j < J; ++j)
      st.prices(k, j) = c.allowed(k, j) ? std::max(evaluation(w_hat, c.rates(k, j)), 0.0) : kInfPrice;
  };

  PriceGameResult out;
  while (std::find(resolved.begin(), resolved.end(), 0) != resolved.end()) {
    if (st.round >= opt.max_rounds) {
      out.probing_rounds = st.round;
      out.converged = false;
      out.prices = st.prices;
      out.assignment = Assignment(K, J);
      out.selection = Assignment(K, J);
      return out;
    }
    ++st.round;
    for (std::size_t k = 0; k < K; ++k) {
      st.omega_hat[k] = resolved[k] ? estimate(k) : 0.5 * (st.omega_upper[k] + st.omega_lower[k]);
      post_prices(k, st.omega_hat[k]);
    }
    auto outcome = detail::respond(st.prices, c, true_weights, loads);
    st.feedback = outcome.choice;
    for (std::size_t k = 0; k < K; ++k) {
      if (resolved[k]) continue;
      // A user reports at most one BS, so |F_k| > 1 cannot occur.
      if (st.feedback[k])
        st.omega_lower[k] = st.omega_hat[k];
      else
        st.omega_upper[k] = st.omega_hat[k];
      resolved[k] = bracket_closed(k);
    }
    GameRound r;
    r.round = st.round;
    r.phase = "probe";
    r.prices_or_bids = st.prices;
    r.connections = std::move(outcome.choice);
    r.provider_utility = outcome.provider;
    r.user_utility_sum = outcome.users;
    r.waiting_lists.assign(J, {});
    r.capacity_violations = std::move(outcome.violations);
    r.omega_lower = st.omega_lower;
    r.omega_upper = st.omega_upper;
    r.omega_hat = st.omega_hat;
    out.trace.rounds.push_back(std::move(r));
  }
  out.probing_rounds = st.round;

  // Provider: valuation matrix, max-weight selection, optimal prices.
  out.estimated_weights.resize(K);
  for (std::size_t k = 0; k < K; ++k) out.estimated_weights[k] = estimate(k);
  out.valuation = Matrix<double>(K, J, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < J; ++j) {
      if (!c.allowed(k, j)) continue;
      out.valuation(k, j) = opt.form == EvaluationForm::log_rate
                                ? evaluation(out.estimated_weights[k], c.rates(k, j))
                                : out.estimated_weights[k] * c.rates(k, j);
    }
  WeightMatrix v{out.valuation, loads, c.candidate};
  out.selection = solve_max_weight(v, AssociationMode::optional);

  st.prices = Matrix<double>(K, J, kInfPrice);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < J; ++j) {
      if (!c.allowed(k, j)) continue;
      const double val = out.valuation(k, j);
      st.prices(k, j) = out.selection.serving(k) == j ? val : std::max(val, 0.0) + opt.epsilon;
    }
  ++st.round;
  auto outcome = detail::respond(st.prices, c, true_weights, loads);
  out.assignment = Assignment(K, J);
  out.user_utilities.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    if (const auto j = outcome.choice[k]) {
      out.assignment.assign(k, *j);
      out.user_utilities[k] = evaluation(true_weights[k], c.rates(k, *j)) - st.prices(k, *j);
    }
  out.provider_utility = outcome.provider;
  out.prices = st.prices;
  out.converged = true;

  GameRound r;
  r.round = st.round;
  r.phase = "final";
  r.prices_or_bids = st.prices;
  r.connections = std::move(outcome.choice);
  r.provider_utility = outcome.provider;
  r.user_utility_sum = outcome.users;
  r.waiting_lists.assign(J, {});
  r.capacity_violations = std::move(outcome.violations);
  r.omega_lower = st.omega_lower;
  r.omega_upper = st.omega_upper;
  r.omega_hat = out.estimated_weights;
  out.trace.rounds.push_back(std::move(r));
  return out;
}

/// Why a profile fails to be an equilibrium.
struct NeWitness {
  enum class Kind { user_deviation, provider_deviation, capacity_violation } kind;
  std::size_t user = 0;
  std::optional<std::size_t> bs;  // BS of the deviation (none: disconnect)
  double gain = 0.0;
};

struct NeReport {
  bool is_ne = true;
  std::optional<NeWitness> witness;
};

/// Checks that (a) no user gains by changing its connection and (b) no
/// single-entry price change raises the provider's revenue once users
/// best-respond, without breaking a BS load.
inline NeReport verify_ne(const Matrix<double>& prices, const Assignment& a, const RateMatrix& c,
                          const std::vector<double>& weights, const std::vector<int>& loads, double tol = 1e-9) {
  detail::check_game_inputs(c, weights, loads);
  const std::size_t K = c.num_users();
  const std::size_t J = c.num_bs();
  if (!prices.same_shape(K, J) || a.num_users() != K || a.num_bs() != J)
    throw std::invalid_argument("verify_ne: dimension mismatch");
  auto slack = [&](double v) { return tol * std::max(1.0, std::abs(v)); };
  auto payoff = [&](std::size_t k, std::size_t j) { return evaluation(weights[k], c.rates(k, j)) - prices(k, j); };
  auto available = [&](std::size_t k, std::size_t j) { return c.allowed(k, j) && prices(k, j) != kInfPrice; };

  const auto load = a.load();
  for (std::size_t j = 0; j < J; ++j)
    if (load[j] > loads[j])
      return {false, NeWitness{NeWitness::Kind::capacity_violation, 0, j, static_cast<double>(load[j] - loads[j])}};

  // Users: payoff of the current row against every alternative row.
  for (std::size_t k = 0; k < K; ++k) {
    const auto s = a.serving(k);
    if (s && !available(k, *s)) return {false, NeWitness{NeWitness::Kind::user_deviation, k, std::nullopt, kInfPrice}};
    const double current = s ? payoff(k, *s) : 0.0;
    if (0.0 > current + slack(current)) return {false, NeWitness{NeWitness::Kind::user_deviation, k, std::nullopt, -current}};
    for (std::size_t j = 0; j < J; ++j) {
      if (!available(k, j) || s == j) continue;
      const double alt = payoff(k, j);
      if (alt > current + slack(current)) return {false, NeWitness{NeWitness::Kind::user_deviation, k, j, alt - current}};
    }
  }

  // Provider: for each entry, the highest price at which user k still picks j.
  for (std::size_t k = 0; k < K; ++k) {
    const auto s = a.serving(k);
    const double revenue = s ? prices(k, *s) : 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      if (!c.allowed(k, j)) continue;
      double outside = 0.0;
      for (std::size_t jj = 0; jj < J; ++jj)
        if (jj != j && available(k, jj)) outside = std::max(outside, payoff(k, jj));
      const double best_price = evaluation(weights[k], c.rates(k, j)) - outside;
      if (!(best_price >= 0.0)) continue;
      if (s != j && load[j] >= loads[j]) continue;
      if (best_price > revenue + slack(revenue))
        return {false, NeWitness{NeWitness::Kind::provider_deviation, k, j, best_price - revenue}};
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Bidding game
// ---------------------------------------------------------------------------

struct BidGameState {
  int round = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> waiting_lists;  // sorted best-first
  Mask rejected;                                                           // K x J, permanent
  Matrix<double> bids;  // outstanding offers this round (0 where none)
  std::vector<double> provider_utility_trace;
};

struct BiddingOptions {
  int max_rounds = 0;  // 0: K * J + 1
};

struct BiddingResult {
  Assignment matching;
  Matrix<double> bid_values;  // max{omega log2 c, 0}; -inf on non-candidates
  GameTrace trace;
  int rounds = 0;
  bool converged = false;
  double provider_utility = 0.0;
};

/// Bid matrix max{omega_k log2 c_kj, 0}, -inf where the pair is not a candidate.
inline Matrix<double> bid_matrix(const RateMatrix& c, const std::vector<double>& weights) {
  Matrix<double> b(c.num_users(), c.num_bs(), -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < c.num_users(); ++k)
    for (std::size_t j = 0; j < c.num_bs(); ++j)
      if (c.allowed(k, j)) b(k, j) = std::max(evaluation(weights[k], c.rates(k, j)), 0.0);
  return b;
}

inline BiddingResult bidding_game_run(const RateMatrix& c, const std::vector<double>& weights,
                                      const std::vector<int>& loads, const BiddingOptions& opt = {}) {
  detail::check_game_inputs(c, weights, loads);
  const std::size_t K = c.num_users();
  const std::size_t J = c.num_bs();
  const int max_rounds = opt.max_rounds > 0 ? opt.max_rounds : static_cast<int>(K * J) + 1;

  BiddingResult out;
  out.bid_values = bid_matrix(c, weights);
  const auto& value = out.bid_values;

  BidGameState st;
  st.waiting_lists.assign(J, {});
  st.rejected = Mask(K, J, 0);
  std::vector<std::optional<std::size_t>> placed(K);

  auto best_remaining = [&](std::size_t k) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < J; ++j) {
      if (!c.allowed(k, j) || st.rejected(k, j)) continue;
      if (!best || value(k, j) > value(k, *best)) best = j;
    }
    return best;
  };
  auto held_sum = [&] {
    double s = 0.0;
    for (const auto& list : st.waiting_lists)
      for (const auto& [k, b] : list) s += b;
    return s;
  };

  for (;;) {
    if (st.round >= max_rounds) break;
    ++st.round;
    st.bids = Matrix<double>(K, J, 0.0);
    std::vector<std::vector<std::pair<std::size_t, double>>> offers(J);
    bool any_offer = false;
    for (std::size_t k = 0; k < K; ++k) {
      if (placed[k]) {
        st.bids(k, *placed[k]) = value(k, *placed[k]);
        continue;
      }
      if (const auto j = best_remaining(k)) {
        offers[*j].push_back({k, value(k, *j)});
        st.bids(k, *j) = value(k, *j);
        any_offer = true;
      }
    }

    for (std::size_t j = 0; j < J; ++j) {
      if (offers[j].empty()) continue;
      auto& list = st.waiting_lists[j];
      list.insert(list.end(), offers[j].begin(), offers[j].end());
      std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
        return a.second > b.second || (a.second == b.second && a.first < b.first);
      });
      for (const auto& [k, b] : list) placed[k] = j;
      const std::size_t keep = static_cast<std::size_t>(std::max(loads[j], 0));
      for (std::size_t i = keep; i < list.size(); ++i) {
        st.rejected(list[i].first, j) = 1;
        placed[list[i].first].reset();
      }
      if (list.size() > keep) list.resize(keep);
    }
    st.provider_utility_trace.push_back(held_sum());

    GameRound r;
    r.round = st.round;
    r.phase = "bid";
    r.prices_or_bids = st.bids;
    r.connections = placed;
    r.provider_utility = st.provider_utility_trace.back();
    r.user_utility_sum = r.provider_utility;  // a placed user's utility equals its bid
    r.waiting_lists.resize(J);
    r.thresholds.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
      for (const auto& [k, b] : st.waiting_lists[j]) r.waiting_lists[j].push_back(k);
      const auto& list = st.waiting_lists[j];
      r.thresholds[j] = list.size() < static_cast<std::size_t>(std::max(loads[j], 0)) || list.empty()
                            ? -std::numeric_limits<double>::infinity()
                            : list.back().second;
    }
    r.user_bids.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      if (placed[k]) {
        r.user_bids[k] = value(k, *placed[k]);
      } else {
        // A user rejected this round still made this round's offer.
        for (std::size_t j = 0; j < J; ++j)
          for (const auto& [kk, b] : offers[j])
            if (kk == k) r.user_bids[k] = b;
      }
    }
    out.trace.rounds.push_back(std::move(r));

    if (!any_offer) {
      out.converged = true;
      break;
    }
  }

  out.rounds = st.round;
  out.matching = Assignment(K, J);
  for (std::size_t k = 0; k < K; ++k)
    if (placed[k]) out.matching.assign(k, *placed[k]);
  out.provider_utility = held_sum();
  return out;
}

struct BlockingPair {
  std::size_t user = 0;
  std::size_t bs = 0;
};

struct StabilityReport {
  bool stable = true;
  std::optional<BlockingPair> blocking;
};

/// A pair (k, j) blocks when user k strictly prefers j to its placement (an
/// unplaced user values staying out at 0) and BS j has a free slot or holds a
/// strictly lower bid. -inf bids mark pairs that cannot bid.
inline StabilityReport verify_stability(const Assignment& matching, const Matrix<double>& bids,
                                        const std::vector<int>& loads) {
  const std::size_t K = matching.num_users();
  const std::size_t J = matching.num_bs();
  if (!bids.same_shape(K, J) || loads.size() != J) throw std::invalid_argument("verify_stability: dimension mismatch");
  const auto load = matching.load();
  for (std::size_t j = 0; j < J; ++j)
    if (load[j] > loads[j]) throw std::invalid_argument("verify_stability: matching exceeds a load");
  std::vector<double> lowest(J, std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < K; ++k)
    if (auto s = matching.serving(k)) lowest[*s] = std::min(lowest[*s], bids(k, *s));

  for (std::size_t k = 0; k < K; ++k) {
    const auto s = matching.serving(k);
    const double current = s ? bids(k, *s) : 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      if (s == j || bids(k, j) == -std::numeric_limits<double>::infinity()) continue;
      if (!(bids(k, j) > current)) continue;
      if (load[j] < loads[j] || lowest[j] < bids(k, j)) return {false, BlockingPair{k, j}};
    }
  }
  return {};
}

}  // namespace hetnet
