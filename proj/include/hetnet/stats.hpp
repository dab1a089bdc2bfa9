#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include <boost/math/distributions/students_t.hpp>

namespace hetnet {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;      // sample standard deviation
  double half_width = 0.0;  // Student-t confidence half-width
};

/// Mean and two-sided Student-t confidence interval (default 95%).
inline Summary summarize(std::span<const double> xs, double confidence = 0.95) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  const boost::math::students_t dist(static_cast<double>(s.n - 1));
  const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
  s.half_width = t * s.stddev / std::sqrt(static_cast<double>(s.n));
  return s;
}

}  // namespace hetnet
