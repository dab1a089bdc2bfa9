#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnet/matrix.hpp"
#include "hetnet/model.hpp"

namespace hetnet {

/// Row constraint on each user: at most one BS, or exactly one BS.
enum class AssociationMode { optional, mandatory };

/// Binary user-BS association. Each user holds at most one serving BS, so the
/// row constraint sum_j x_kj <= 1 holds by construction.
class Assignment {
 public:
  Assignment() = default;
  Assignment(std::size_t users, std::size_t bss) : bss_(bss), serving_(users) {}

  std::size_t num_users() const { return serving_.size(); }
  std::size_t num_bs() const { return bss_; }

  std::optional<std::size_t> serving(std::size_t k) const { return serving_[k]; }
  bool assigned(std::size_t k) const { return serving_[k].has_value(); }
  int x(std::size_t k, std::size_t j) const { return serving_[k] == j ? 1 : 0; }

  void assign(std::size_t k, std::size_t j) {
    if (j >= bss_) throw std::out_of_range("assign: BS index out of range");
    serving_[k] = j;
  }
  void clear(std::size_t k) { serving_[k].reset(); }

  std::vector<int> load() const {
    std::vector<int> per_bs(bss_, 0);
    for (const auto& s : serving_)
      if (s) ++per_bs[*s];
    return per_bs;
  }

  std::size_t num_assigned() const {
    std::size_t n = 0;
    for (const auto& s : serving_) n += s.has_value();
    return n;
  }

  Matrix<int> to_matrix() const {
    Matrix<int> m(num_users(), bss_, 0);
    for (std::size_t k = 0; k < serving_.size(); ++k)
      if (serving_[k]) m(k, *serving_[k]) = 1;
    return m;
  }

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::size_t bss_ = 0;
  std::vector<std::optional<std::size_t>> serving_;
};

/// Per-pair weights plus per-BS capacities. Entries equal to -inf, or masked
/// out, are forbidden pairs.
struct WeightMatrix {
  Matrix<double> w;
  std::vector<int> capacities;
  Mask allowed;

  std::size_t num_users() const { return w.rows(); }
  std::size_t num_bs() const { return w.cols(); }

  bool permitted(std::size_t k, std::size_t j) const {
    return allowed(k, j) != 0 && w(k, j) != -std::numeric_limits<double>::infinity();
  }

  static WeightMatrix dense(Matrix<double> w, std::vector<int> capacities) {
    WeightMatrix out{std::move(w), std::move(capacities), {}};
    out.allowed = Mask(out.w.rows(), out.w.cols(), 1);
    out.check();
    return out;
  }

  void check() const {
    if (capacities.size() != w.cols()) throw std::invalid_argument("WeightMatrix: one capacity per BS required");
    if (!allowed.same_shape(w.rows(), w.cols())) throw std::invalid_argument("WeightMatrix: mask shape mismatch");
    for (int c : capacities)
      if (c < 0) throw std::invalid_argument("WeightMatrix: capacities must be >= 0");
    for (double v : w.data())
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
        throw std::invalid_argument("WeightMatrix: entries must be finite or -inf");
  }
};

/// Sum-rate weights: w = c on candidate pairs.
inline WeightMatrix rate_weights(const RateMatrix& c, std::vector<int> capacities) {
  WeightMatrix out{c.rates, std::move(capacities), c.candidate};
  out.check();
  return out;
}

/// Proportional-fairness weights: w = log2 c, with c = 0 forbidden.
inline WeightMatrix log_rate_weights(const RateMatrix& c, std::vector<int> capacities) {
  WeightMatrix out{Matrix<double>(c.num_users(), c.num_bs()), std::move(capacities), c.candidate};
  for (std::size_t k = 0; k < c.num_users(); ++k)
    for (std::size_t j = 0; j < c.num_bs(); ++j)
      out.w(k, j) = c.rates(k, j) > 0.0 ? std::log2(c.rates(k, j)) : -std::numeric_limits<double>::infinity();
  out.check();
  return out;
}

/// Empty when the assignment satisfies mode, capacity and candidacy;
/// otherwise a description of the first violation.
inline std::string assignment_violation(const Assignment& a, const WeightMatrix& w, AssociationMode mode) {
  if (a.num_users() != w.num_users() || a.num_bs() != w.num_bs()) return "dimension mismatch";
  for (std::size_t k = 0; k < a.num_users(); ++k) {
    const auto s = a.serving(k);
    if (!s) {
      if (mode == AssociationMode::mandatory) return "user " + std::to_string(k) + " unassigned in mandatory mode";
      continue;
    }
    if (!w.permitted(k, *s)) return "user " + std::to_string(k) + " on forbidden BS " + std::to_string(*s);
  }
  const auto load = a.load();
  for (std::size_t j = 0; j < load.size(); ++j)
    if (load[j] > w.capacities[j]) return "BS " + std::to_string(j) + " over capacity";
  return {};
}

inline double assignment_value(const Assignment& a, const Matrix<double>& w) {
  double v = 0.0;
  for (std::size_t k = 0; k < a.num_users(); ++k)
    if (auto s = a.serving(k)) v += w(k, *s);
  return v;
}

/// Per-user rate eta_k = sum_j x_kj c_kj.
inline std::vector<double> user_rates(const Assignment& a, const RateMatrix& c) {
  std::vector<double> eta(a.num_users(), 0.0);
  for (std::size_t k = 0; k < a.num_users(); ++k)
    if (auto s = a.serving(k)) eta[k] = c.rates(k, *s);
  return eta;
}

/// Alpha-fair network utility for alpha in {0, 1}; U(0) = 0 for the log case.
inline double utility(const Assignment& a, const RateMatrix& c, int alpha) {
  if (alpha != 0 && alpha != 1) throw std::invalid_argument("utility: only alpha 0 and 1 are supported");
  double total = 0.0;
  for (double eta : user_rates(a, c)) {
    if (alpha == 0)
      total += eta;
    else if (eta > 0.0)
      total += std::log2(eta);
  }
  return total;
}

/// CSV `user_id,bs_id`; unassigned users are omitted.
inline void write_assignment_csv(std::ostream& out, const Assignment& a) {
  out << "user_id,bs_id\n";
  for (std::size_t k = 0; k < a.num_users(); ++k)
    if (auto s = a.serving(k)) out << k << ',' << *s << '\n';
}

}  // namespace hetnet
