#pragma once

// Invariant and oracle suites shared by the `verify` command and the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hbeliefs/dynamics.hpp"
#include "hbeliefs/equilibrium.hpp"
#include "hbeliefs/model.hpp"
#include "hbeliefs/numerics.hpp"
#include "hbeliefs/simulate.hpp"
#include "hbeliefs/snapshot.hpp"

namespace hbeliefs {

inline constexpr double kClearingTolerance = 1e-12;
inline constexpr double kAggregationTolerance = 1e-10;
inline constexpr double kFdTolerance = 1e-5;
inline constexpr double kRiskPremiumTolerance = 1e-8;
inline constexpr double kZScoreBound = 3.0;
/// Relative errors of rate-like quantities are taken against max(|value|, floor).
inline constexpr double kFdRelativeFloor = 1e-3;

struct CheckResult {
  std::string suite;
  std::string quantity;
  double observed = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t n_states = 20;
  double max_t = 10.0;
  double max_abs_x = 5.0;
  std::size_t mc_paths = 100'000;
  double martingale_horizon = 5.0;
  std::size_t martingale_steps = 500;
  unsigned threads = 1;
  /// Test hook: added to the closed-form riskless rate before comparison.
  double riskless_rate_fault = 0.0;
};

inline std::vector<MarketState> random_states(std::size_t n, std::uint64_t seed, double max_t, double max_abs_x) {
  std::mt19937_64 eng(seed ^ 0x5eed5eedULL);
  std::uniform_real_distribution<double> ut(0.0, max_t), ux(-max_abs_x, max_abs_x);
  std::vector<MarketState> out(n);
  for (auto& s : out) {
    s.t = ut(eng);
    s.x = ux(eng);
  }
  return out;
}

namespace detail {

inline CheckResult max_check(std::string suite, std::string quantity, const std::vector<double>& errors,
                             double threshold) {
  const double worst = errors.empty() ? 0.0 : *std::max_element(errors.begin(), errors.end());
  return {std::move(suite), std::move(quantity), worst, threshold, worst <= threshold};
}

/// Drift rate of f from the derivatives of log f: (d_t f + d_xx f / 2) / f.
inline double drift_from_log(const FdDerivatives& d) { return d.d_t + 0.5 * (d.d_xx + d.d_x * d.d_x); }

}  // namespace detail

inline std::vector<CheckResult> verify_clearing(const DenominatorTable& tab, const VerifyOptions& opt) {
  std::vector<double> cons, agg, pi_sum, bond, pd;
  for (const auto& s : random_states(opt.n_states, opt.seed, opt.max_t, opt.max_abs_x)) {
    const auto snap = snapshot(s, tab);
    double c = 0.0, w = 0.0, p = 0.0, b = 0.0;
    for (std::size_t j = 0; j < snap.consumptions.size(); ++j) {
      c += snap.consumptions[j];
      w += snap.wealths[j];
      p += snap.portfolios[j];
      b += snap.wealths[j] - snap.portfolios[j] * snap.stock_price;
    }
    cons.push_back(relative_error(c, snap.dividend));
    agg.push_back(relative_error(w, snap.stock_price));
    pi_sum.push_back(relative_error(p, 1.0));
    bond.push_back(std::abs(b) / snap.stock_price);
    pd.push_back(relative_error(snap.pd_ratio, snap.stock_price / snap.dividend));
  }
  return {detail::max_check("clearing", "consumption_clearing", cons, kClearingTolerance),
          detail::max_check("clearing", "wealth_aggregation", agg, kAggregationTolerance),
          detail::max_check("clearing", "portfolio_clearing", pi_sum, kAggregationTolerance),
          detail::max_check("clearing", "bond_net_supply", bond, kAggregationTolerance),
          detail::max_check("clearing", "pd_ratio", pd, kClearingTolerance)};
}

/// Every Ito coefficient against central differences of the field it
/// describes, plus the risk-premium identity.
inline std::vector<CheckResult> verify_fd(const DenominatorTable& tab, const VerifyOptions& opt,
                                          const FdSteps& steps = {}) {
  const auto& p = tab.params();
  const std::size_t J = p.num_agents();
  std::vector<double> e_abar, e_rbar, e_r, e_kappa, e_atil, e_rtil, e_vol, e_mu, e_prem;
  std::vector<std::vector<double>> e_aj(J);

  auto log_l = [&](double t, double x) { return log_aggregate_composition_sum({t, x}, tab); };
  auto log_z = [&](double t, double x) { return log_price_kernel_sum({t, x}, tab); };
  auto log_zeta = [&](double t, double x) { return log_state_price_density({t, x}, p); };
  auto log_s = [&](double t, double x) { return log_stock_price({t, x}, tab); };

  for (const auto& s : random_states(opt.n_states, opt.seed, opt.max_t, opt.max_abs_x)) {
    const auto rates = rate_bundle(s, tab);
    const auto sd = stock_dynamics(s, tab, rates);
    const double r_closed = rates.riskless_rate + opt.riskless_rate_fault;
    const auto dl = fd_engine(log_l, s, steps);
    const auto dz = fd_engine(log_z, s, steps);
    const auto dzeta = fd_engine(log_zeta, s, steps);
    const auto ds = fd_engine(log_s, s, steps);
    const double f = kFdRelativeFloor;
    e_abar.push_back(relative_error(rates.alpha_bar, dl.d_x, f));
    e_rbar.push_back(relative_error(rates.rho_bar, -detail::drift_from_log(dl), f));
    e_r.push_back(relative_error(r_closed, -detail::drift_from_log(dzeta), f));
    e_kappa.push_back(relative_error(rates.kappa, -dzeta.d_x, f));
    e_atil.push_back(relative_error(sd.alpha_tilde, dz.d_x, f));
    e_rtil.push_back(relative_error(sd.rho_tilde, -detail::drift_from_log(dz), f));
    e_vol.push_back(relative_error(sd.vol, ds.d_x, f));
    e_mu.push_back(relative_error(sd.drift, detail::drift_from_log(ds), f));
    for (std::size_t j = 0; j < J; ++j) {
      auto log_zj = [&](double t, double x) { return log_wealth_kernel_sum({t, x}, tab, j); };
      e_aj[j].push_back(relative_error(agent_alpha_tilde(s, tab, j), fd_engine(log_zj, s, steps).d_x, f));
    }
    const double lhs = sd.drift + std::exp(-log_price_kernel_sum(s, tab) + log_aggregate_weight(s, p)) - r_closed;
    const double rhs = rates.kappa * sd.vol;
    e_prem.push_back(std::abs(lhs - rhs) / std::max({std::abs(rhs), std::abs(lhs), kFdRelativeFloor}));
  }

  std::vector<CheckResult> out{
      detail::max_check("fd", "alpha_bar", e_abar, kFdTolerance),
      detail::max_check("fd", "rho_bar", e_rbar, kFdTolerance),
      detail::max_check("fd", "riskless_rate", e_r, kFdTolerance),
      detail::max_check("fd", "kappa", e_kappa, kFdTolerance),
      detail::max_check("fd", "alpha_tilde", e_atil, kFdTolerance),
      detail::max_check("fd", "rho_tilde", e_rtil, kFdTolerance),
      detail::max_check("fd", "sigma_S", e_vol, kFdTolerance),
      detail::max_check("fd", "mu_S", e_mu, kFdTolerance),
  };
  for (std::size_t j = 0; j < J; ++j)
    out.push_back(detail::max_check("fd", "alpha_tilde_" + std::to_string(j + 1), e_aj[j], kFdTolerance));
  out.push_back(detail::max_check("fd", "risk_premium_identity", e_prem, kRiskPremiumTolerance));
  return out;
}

inline CheckResult z_check(std::string suite, std::string quantity, const OracleReport& r) {
  return {std::move(suite), std::move(quantity), std::abs(r.z_score), kZScoreBound,
          std::abs(r.z_score) <= kZScoreBound};
}

inline std::vector<CheckResult> verify_mc(const DenominatorTable& tab, const VerifyOptions& opt) {
  MonteCarloSettings cfg;
  cfg.n_paths = opt.mc_paths;
  cfg.seed = opt.seed;
  cfg.threads = opt.threads;
  const MarketState origin{0.0, 0.0};
  std::vector<CheckResult> out;
  for (std::size_t j = 0; j < tab.params().num_agents(); ++j) {
    cfg.seed = opt.seed + 1000 * (j + 1);
    out.push_back(z_check("mc", "wealth_" + std::to_string(j + 1), mc_wealth_oracle(origin, tab, j, cfg)));
  }
  cfg.seed = opt.seed;
  out.push_back(z_check("mc", "stock_price", mc_stock_oracle(origin, tab, cfg)));
  return out;
}

inline std::vector<CheckResult> verify_martingale(const DenominatorTable& tab, const VerifyOptions& opt) {
  return {z_check("martingale", "discounted_gains",
                  martingale_check(tab, opt.martingale_horizon, opt.martingale_steps, opt.mc_paths, opt.seed,
                                   opt.threads))};
}

}  // namespace hbeliefs
