#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "ssate/common.hpp"

namespace ssate {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / M_SQRT2); }

inline double weighted_mean(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  double sw = w.sum();
  return v.dot(w) / sw;
}

// Weighted sample standard deviation with divisor (sum w - 1), so that unit
// weights give the usual n-1 convention and integer weights match the
// expanded multiset.
inline double weighted_sd(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  double sw = w.sum();
  double m = v.dot(w) / sw;
  double ss = (w.array() * (v.array() - m).square()).sum();
  double denom = sw - 1.0;
  if (denom <= 0.0) return 0.0;
  return std::sqrt(ss / denom);
}

// Left-continuous inverse of the weighted empirical CDF (type-1 quantile):
// the smallest value whose cumulative weight reaches p * (sum of weights).
// With unit weights this is the classic type-1 sample quantile, and with
// integer weights it matches the quantile of the expanded multiset.
inline double weighted_quantile(const Eigen::VectorXd& v, const Eigen::VectorXd& w, double p) {
  const Eigen::Index n = v.size();
  if (n == 0) throw InputError("weighted_quantile: empty input");
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
  double sw = w.sum();
  double target = p * sw;
  target -= 1e-9 * std::max(1.0, std::abs(target));
  double cum = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cum += w[order[k]];
    if (cum >= target) return v[order[k]];
  }
  return v[order[n - 1]];
}

// Type-7 (linear interpolation) quantile of a sorted vector.
inline double quantile_sorted_type7(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw InputError("quantile: empty input");
  if (sorted.size() == 1) return sorted[0];
  double pos = p * static_cast<double>(sorted.size() - 1);
  double lo = std::floor(pos);
  std::size_t i = static_cast<std::size_t>(lo);
  if (i + 1 >= sorted.size()) return sorted.back();
  double frac = pos - lo;
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

inline double median_sorted(const std::vector<double>& sorted) {
  if (sorted.empty()) throw InputError("median: empty input");
  std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return median_sorted(values);
}

// 1.4826 * median absolute deviation: consistent for the normal sd.
inline double mad_scale(const std::vector<double>& values) {
  double med = median(values);
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - med);
  return 1.4826 * median(std::move(dev));
}

inline double sample_sd(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double m = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / (values.size() - 1));
}

inline double sample_mean(const std::vector<double>& values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(values.begin(), values.end(), 0.0) / values.size();
}

}  // namespace ssate
