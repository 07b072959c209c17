#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace hbeliefs {

/// log(sum_i exp(v_i)) with max subtraction. Empty input gives -inf.
inline double logsumexp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double e : v) s += std::exp(e - m);
  return m + std::log(s);
}

/// Normalized exp(log_weights) as probabilities.
inline std::vector<double> softmax(std::span<const double> log_weights) {
  std::vector<double> w(log_weights.size());
  if (w.empty()) return w;
  const double m = *std::max_element(log_weights.begin(), log_weights.end());
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_weights[i] - m);
    s += w[i];
  }
  for (double& e : w) e /= s;
  return w;
}

/// sum_i p_i v_i with p = softmax(log_weights).
inline double softmax_mean(std::span<const double> log_weights, std::span<const double> values) {
  assert(log_weights.size() == values.size());
  if (log_weights.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double m = *std::max_element(log_weights.begin(), log_weights.end());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = std::exp(log_weights[i] - m);
    num += w * values[i];
    den += w;
  }
  return num / den;
}

/// |a - b| / max(|b|, floor)
inline double relative_error(double a, double b, double floor = 0.0) {
  const double scale = std::max(std::abs(b), floor);
  if (scale == 0.0) return std::abs(a - b);
  return std::abs(a - b) / scale;
}

}  // namespace hbeliefs
