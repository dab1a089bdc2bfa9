#pragma once

// Network model: base stations, users, large/small-scale channel and the
// closed-form per-link achievable rates that every solver consumes.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnet/matrix.hpp"

namespace hetnet {

enum class BsKind { macro, pico };

inline const char* to_string(BsKind kind) { return kind == BsKind::macro ? "macro" : "pico"; }

inline BsKind bs_kind_from_string(const std::string& s) {
  if (s == "macro") return BsKind::macro;
  if (s == "pico") return BsKind::pico;
  throw std::invalid_argument("unknown base station kind: " + s);
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline constexpr double kMacroPathLossExponent = 3.5;
inline constexpr double kPicoPathLossExponent = 4.0;

inline double default_path_loss_exponent(BsKind kind) {
  return kind == BsKind::macro ? kMacroPathLossExponent : kPicoPathLossExponent;
}

/// Transmit power in dBm to linear watts; noise power is normalized to 1.
inline double dbm_to_linear(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }
inline double linear_to_dbm(double watts) { return 10.0 * std::log10(watts * 1000.0); }

struct BaseStation {
  std::size_t id = 0;
  BsKind kind = BsKind::pico;
  Point position;
  int antennas = 1;
  int load_capacity = 1;
  double tx_power = 1.0;  // linear, noise-normalized
  double path_loss_exponent = kPicoPathLossExponent;
  double rate_bias = 1.0;
};

struct UserTerminal {
  std::size_t id = 0;
  Point position;
  double weight = 1.0;
};

struct Area {
  double width = 0.0;
  double height = 0.0;
};

struct Scenario {
  std::vector<BaseStation> base_stations;
  std::vector<UserTerminal> users;
  Area area;
  double coverage_radius = 300.0;
  std::uint64_t seed = 0;
  // Whether picocell transmit power counts as interference in the macro rate.
  bool macro_interference_includes_picos = true;

  std::size_t num_users() const { return users.size(); }
  std::size_t num_bs() const { return base_stations.size(); }

  std::size_t macro_index() const {
    for (const auto& bs : base_stations)
      if (bs.kind == BsKind::macro) return bs.id;
    throw std::logic_error("scenario has no macro base station");
  }

  std::vector<int> capacities() const {
    std::vector<int> caps;
    caps.reserve(base_stations.size());
    for (const auto& bs : base_stations) caps.push_back(bs.load_capacity);
    return caps;
  }

  std::vector<double> weights() const {
    std::vector<double> w;
    w.reserve(users.size());
    for (const auto& u : users) w.push_back(u.weight);
    return w;
  }
};

inline bool inside(const Area& area, Point p) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= area.width && p.y <= area.height;
}

/// Throws std::invalid_argument describing the first violated invariant.
inline void validate(const Scenario& s) {
  if (!(s.area.width > 0.0) || !(s.area.height > 0.0)) throw std::invalid_argument("area must be positive");
  if (!(s.coverage_radius >= 0.0)) throw std::invalid_argument("coverage_radius must be >= 0");
  std::size_t macros = 0;
  for (std::size_t j = 0; j < s.base_stations.size(); ++j) {
    const auto& bs = s.base_stations[j];
    const std::string tag = "base station " + std::to_string(j) + ": ";
    if (bs.id != j) throw std::invalid_argument(tag + "ids must be dense and 0-based");
    if (bs.kind == BsKind::macro) ++macros;
    if (bs.antennas < 1) throw std::invalid_argument(tag + "antennas must be >= 1");
    if (bs.load_capacity < 0 || bs.load_capacity > bs.antennas)
      throw std::invalid_argument(tag + "load must be in [0, antennas]");
    if (!(bs.tx_power > 0.0)) throw std::invalid_argument(tag + "tx power must be positive");
    if (!(bs.rate_bias > 0.0)) throw std::invalid_argument(tag + "rate bias must be positive");
    if (!(bs.path_loss_exponent > 0.0)) throw std::invalid_argument(tag + "path loss exponent must be positive");
    if (!inside(s.area, bs.position)) throw std::invalid_argument(tag + "position outside area");
  }
  if (macros != 1) throw std::invalid_argument("scenario needs exactly one macro base station");
  for (std::size_t k = 0; k < s.users.size(); ++k) {
    const auto& u = s.users[k];
    const std::string tag = "user " + std::to_string(k) + ": ";
    if (u.id != k) throw std::invalid_argument(tag + "ids must be dense and 0-based");
    if (!(u.weight > 0.0)) throw std::invalid_argument(tag + "weight must be positive");
    if (!inside(s.area, u.position)) throw std::invalid_argument(tag + "position outside area");
  }
}

// ---------------------------------------------------------------------------
// Closed-form rate expressions
// ---------------------------------------------------------------------------

/// Large-scale gain 1 / (1 + (d/40)^exponent).
inline double path_loss(double distance_m, double exponent) {
  if (!(distance_m >= 0.0)) throw std::domain_error("path_loss: distance must be >= 0");
  if (!(exponent > 0.0)) throw std::domain_error("path_loss: exponent must be > 0");
  return 1.0 / (1.0 + std::pow(distance_m / 40.0, exponent));
}

/// Deterministic-equivalent rate of a massive-MIMO link, in bits/s/Hz.
/// `interference` is the sum of P_j' * l_j',k over the other base stations.
inline double macro_rate(int antennas, int load, double power, double serving_gain, double interference) {
  if (load < 1 || load > antennas) throw std::domain_error("macro_rate: need 1 <= load <= antennas");
  if (!(power > 0.0) || !(serving_gain >= 0.0) || !(interference >= 0.0))
    throw std::domain_error("macro_rate: power must be > 0, gain and interference >= 0");
  const double dof = static_cast<double>(antennas - load + 1) / static_cast<double>(load);
  return std::log2(1.0 + dof * power * serving_gain / (1.0 + interference));
}

/// Picocell rate under the worst-case approximation where every user in the
/// coverage set is served by the same BS. `gains_sum` is sum_n |g_n|^2, so
/// |h^H h| = l^2 * gains_sum.
inline double pico_rate_worstcase(double power, double gain, double gains_sum, std::size_t coverage_count) {
  if (coverage_count == 0) throw std::domain_error("pico_rate_worstcase: user must be inside its coverage set");
  if (!(power >= 0.0) || !(gain >= 0.0) || !(gains_sum >= 0.0))
    throw std::domain_error("pico_rate_worstcase: inputs must be nonnegative");
  const double inner = gain * gain * gains_sum;
  const double interference = 1.0 + static_cast<double>(coverage_count - 1) * power;
  return std::log2(1.0 + power * inner * inner / interference);
}

// ---------------------------------------------------------------------------
// Channel state
// ---------------------------------------------------------------------------

inline constexpr double kFadingPowerMin = 0.8;
inline constexpr double kFadingPowerMax = 1.0;

struct ChannelState {
  Matrix<double> large_scale;  // K x J
  // small_scale_power[j] holds K * M_j values |g_{j,k,n}|^2 (row k, antenna n);
  // empty for the macro BS, whose rate carries no small-scale term.
  std::vector<std::vector<double>> small_scale_power;

  double fading_power(std::size_t j, std::size_t k, std::size_t n, std::size_t antennas) const {
    return small_scale_power[j][k * antennas + n];
  }

  double fading_sum(std::size_t j, std::size_t k, std::size_t antennas) const {
    double s = 0.0;
    for (std::size_t n = 0; n < antennas; ++n) s += fading_power(j, k, n, antennas);
    return s;
  }
};

inline Matrix<double> large_scale_gains(const Scenario& s) {
  Matrix<double> g(s.num_users(), s.num_bs());
  for (const auto& u : s.users)
    for (const auto& bs : s.base_stations)
      g(u.id, bs.id) = path_loss(distance(u.position, bs.position), bs.path_loss_exponent);
  return g;
}

template <std::uniform_random_bit_generator Rng>
ChannelState sample_channel(const Scenario& s, Rng& rng) {
  ChannelState ch;
  ch.large_scale = large_scale_gains(s);
  ch.small_scale_power.resize(s.num_bs());
  std::uniform_real_distribution<double> fading(kFadingPowerMin, kFadingPowerMax);
  for (const auto& bs : s.base_stations) {
    if (bs.kind == BsKind::macro) continue;
    auto& powers = ch.small_scale_power[bs.id];
    powers.resize(s.num_users() * static_cast<std::size_t>(bs.antennas));
    for (double& p : powers) p = fading(rng);
  }
  return ch;
}

// ---------------------------------------------------------------------------
// Rate matrix
// ---------------------------------------------------------------------------

struct RateMatrix {
  Matrix<double> rates;  // K x J, bits/s/Hz
  Mask candidate;        // user k may associate with BS j

  std::size_t num_users() const { return rates.rows(); }
  std::size_t num_bs() const { return rates.cols(); }
  bool allowed(std::size_t k, std::size_t j) const { return candidate(k, j) != 0; }

  /// Every pair is a candidate; convenient for hand-built instances.
  static RateMatrix dense(Matrix<double> rates) {
    RateMatrix r{std::move(rates), {}};
    r.candidate = Mask(r.rates.rows(), r.rates.cols(), 1);
    return r;
  }
};

/// Users inside the coverage radius of each BS (the macro covers everyone).
inline std::vector<std::vector<std::size_t>> coverage_sets(const Scenario& s) {
  std::vector<std::vector<std::size_t>> cover(s.num_bs());
  for (const auto& bs : s.base_stations)
    for (const auto& u : s.users)
      if (bs.kind == BsKind::macro || distance(u.position, bs.position) <= s.coverage_radius)
        cover[bs.id].push_back(u.id);
  return cover;
}

inline RateMatrix build_rate_matrix(const Scenario& s, const ChannelState& ch) {
  const std::size_t K = s.num_users();
  const std::size_t J = s.num_bs();
  if (!ch.large_scale.same_shape(K, J) || ch.small_scale_power.size() != J)
    throw std::invalid_argument("build_rate_matrix: channel does not match scenario dimensions");
  for (const auto& bs : s.base_stations) {
    const std::size_t expected = bs.kind == BsKind::macro ? 0 : K * static_cast<std::size_t>(bs.antennas);
    if (ch.small_scale_power[bs.id].size() != expected)
      throw std::invalid_argument("build_rate_matrix: small-scale fading size mismatch");
  }

  RateMatrix out{Matrix<double>(K, J, 0.0), Mask(K, J, 0)};
  const auto cover = coverage_sets(s);
  std::vector<unsigned char> covered(K);

  for (const auto& bs : s.base_stations) {
    const std::size_t j = bs.id;
    if (bs.kind == BsKind::macro) {
      for (std::size_t k = 0; k < K; ++k) {
        double interference = 0.0;
        if (s.macro_interference_includes_picos) {
          for (const auto& other : s.base_stations)
            if (other.id != j) interference += other.tx_power * ch.large_scale(k, other.id);
        }
        out.candidate(k, j) = 1;
        // A zero-load macro serves nobody; keep it a candidate with rate 0.
        out.rates(k, j) = bs.load_capacity == 0
                              ? 0.0
                              : bs.rate_bias * macro_rate(bs.antennas, bs.load_capacity, bs.tx_power,
                                                          ch.large_scale(k, j), interference);
      }
      continue;
    }
    std::fill(covered.begin(), covered.end(), 0);
    for (std::size_t k : cover[j]) covered[k] = 1;
    const std::size_t antennas = static_cast<std::size_t>(bs.antennas);
    for (std::size_t k = 0; k < K; ++k) {
      if (!covered[k]) continue;
      out.candidate(k, j) = 1;
      out.rates(k, j) = bs.rate_bias * pico_rate_worstcase(bs.tx_power, ch.large_scale(k, j),
                                                           ch.fading_sum(j, k, antennas), cover[j].size());
    }
  }
  return out;
}

}  // namespace hetnet
