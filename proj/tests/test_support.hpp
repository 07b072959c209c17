#pragma once

// Fixtures and independent oracles for the test suites. The oracles here are
// written against the model primitives only (dividend, agent weights) and do
// not call the composition sums they are used to check.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hbeliefs/model.hpp"

namespace hbeliefs::testing {

/// R = 2, sigma = 0.1, alpha* = 0, one agent with rho = 0.02: S_0 = w_0 = 100.
inline EconomyParams single_agent() { return {2, 0.1, 0.0, 1.0, {{0.02, 0.0, 0.0}}}; }

/// Two agents, identical except for opposite beliefs.
inline EconomyParams symmetric_pair(double a = 0.3, int R = 3) {
  return {R, 0.1, 0.0, 1.0, {{0.12, a, 0.0}, {0.12, -a, 0.0}}};
}

/// Regression economies: J in {1,2,3}, R in {2,3,4}.
inline std::vector<EconomyParams> regression_economies() {
  return {
      single_agent(),
      {3, 0.1, 0.02, 1.0, {{0.06, 0.15, 0.2}, {0.07, -0.1, -0.2}}},
      {2, 0.15, 0.05, 1.0, {{0.05, 0.2, 0.0}, {0.04, 0.0, 0.3}, {0.06, -0.2, -0.1}}},
      {4, 0.08, 0.0, 1.0, {{0.08, 0.1, 0.0}, {0.08, -0.1, 0.5}}},
      {3, 0.12, 0.03, 1.0, {{0.09, 0.25, 0.1}, {0.08, -0.05, 0.0}, {0.08, 0.1, -0.2}}},
  };
}

/// Economies with light-tailed Monte Carlo integrands (oracle_moment_ratio < 2/3).
inline EconomyParams mc_pair() { return {2, 0.1, 0.02, 1.0, {{0.05, 0.1, 0.0}, {0.06, -0.05, 0.1}}}; }
inline EconomyParams mc_triple() {
  return {3, 0.05, 0.02, 1.0, {{0.04, 0.06, 0.0}, {0.05, -0.03, 0.1}, {0.05, 0.02, -0.1}}};
}

/// Random structurally valid economy (J <= max_j, R <= max_r, |alpha| <= 1); may not validate.
inline EconomyParams draw_economy(std::mt19937_64& eng, int max_j = 4, int max_r = 6) {
  std::uniform_int_distribution<int> uj(1, max_j), ur(2, max_r);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  EconomyParams p;
  p.R = ur(eng);
  p.sigma = 0.05 + 0.25 * u(eng);
  p.alpha_star = -0.1 + 0.3 * u(eng);
  p.delta0 = 0.5 + 1.5 * u(eng);
  const int J = uj(eng);
  for (int j = 0; j < J; ++j) p.agents.push_back({0.01 + 0.5 * u(eng), -1.0 + 2.0 * u(eng), -1.0 + 2.0 * u(eng)});
  return p;
}

/// Rejection-samples until validate() accepts.
inline EconomyParams random_valid_economy(std::mt19937_64& eng, int max_j = 4, int max_r = 6) {
  for (;;) {
    auto p = draw_economy(eng, max_j, max_r);
    try {
      validate(p);
      return p;
    } catch (const NonpositiveDenominator&) {
    }
  }
}

inline std::vector<MarketState> random_states(std::mt19937_64& eng, std::size_t n, double max_t = 10.0,
                                              double max_abs_x = 5.0) {
  std::uniform_real_distribution<double> ut(0.0, max_t), ux(-max_abs_x, max_abs_x);
  std::vector<MarketState> out(n);
  for (auto& s : out) s = {ut(eng), ux(eng)};
  return out;
}

/// Brute-force present value by quadrature:
///   zeta_t^{-1} int_0^inf E[ zeta_{t+s} * payout_{t+s} ] ds,  X_{t+s} = x + sqrt(s) Z,
/// with zeta and consumption written from scratch in agent-sum form. Pass
/// agent < 0 for the dividend (stock price), else that agent's consumption.
/// The Gaussian expectation is a trapezoid rule in z (spectrally accurate for
/// these integrands) and the time integral is composite Simpson out to
/// 40 / D_min, where D_min is the smallest decay rate.
inline double quadrature_present_value(const EconomyParams& p, const MarketState& st, int agent, double d_min) {
  const double R = p.R;
  auto log_delta = [&](double t, double x) {
    return std::log(p.delta0) + p.sigma * x + (p.alpha_star * p.sigma - 0.5 * p.sigma * p.sigma) * t;
  };
  // log(zeta_t * payout_t) and log zeta_t
  auto log_terms = [&](double t, double x, double& log_zeta) {
    std::vector<double> y(p.agents.size());
    double m = -INFINITY;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const auto& a = p.agents[i];
      y[i] = (-a.rho * t - a.gamma + a.alpha * x - 0.5 * a.alpha * a.alpha * t) / R;
      m = std::max(m, y[i]);
    }
    double sum = 0.0;
    for (double v : y) sum += std::exp(v - m);
    const double lse = m + std::log(sum);
    log_zeta = -R * log_delta(t, x) + R * lse;
    const double log_pay = agent < 0 ? log_delta(t, x) : log_delta(t, x) + y[static_cast<std::size_t>(agent)] - lse;
    return log_zeta + log_pay;
  };

  double a_lo = INFINITY, a_hi = -INFINITY;
  for (const auto& a : p.agents) {
    a_lo = std::min(a_lo, a.alpha);
    a_hi = std::max(a_hi, a.alpha);
  }
  // the log-integrand's slope in x lies in [k_lo, k_hi]
  const double k_lo = (1.0 - R) * p.sigma + a_lo, k_hi = (1.0 - R) * p.sigma + a_hi;
  double log_zeta_t = 0.0;
  const double at_t = log_terms(st.t, st.x, log_zeta_t);

  auto expected = [&](double s) {
    double unused = 0.0;
    if (s == 0.0) return std::exp(at_t - log_zeta_t);
    const double rs = std::sqrt(s);
    const double z_lo = std::min(0.0, rs * k_lo) - 14.0, z_hi = std::max(0.0, rs * k_hi) + 14.0;
    const int n = static_cast<int>(std::ceil((z_hi - z_lo) / 0.04));
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double z = z_lo + (z_hi - z_lo) * i / n;
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      acc += w * std::exp(log_terms(st.t + s, st.x + rs * z, unused) - log_zeta_t - 0.5 * z * z);
    }
    return acc * (z_hi - z_lo) / n / std::sqrt(2.0 * M_PI);
  };

  const double s_max = 40.0 / d_min;
  const int intervals = 8000;
  const double h = s_max / intervals;
  double acc = expected(0.0) + expected(s_max);
  for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * expected(i * h);
  return acc * h / 3.0;
}

}  // namespace hbeliefs::testing
