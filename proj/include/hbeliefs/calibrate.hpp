#pragma once

// Agent weights gamma from target wealth shares w^j_0 / S_0.
//
// Shares are invariant to gamma -> gamma + c 1, so solutions are normalized
// to sum(gamma) = 0. The primary iteration is
//   gamma_j <- gamma_j + damping * R * log(share_j / target_j),
// exact in the one-composition limit where share_j is proportional to
// exp(-gamma_j / R). When it stalls, a finite-difference Newton step on the
// reduced share map takes over.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "hbeliefs/equilibrium.hpp"
#include "hbeliefs/errors.hpp"
#include "hbeliefs/model.hpp"

namespace hbeliefs {

struct CalibrationTarget {
  std::vector<double> shares;
  MarketState state{0.0, 0.0};

  void check(std::size_t J) const {
    if (shares.size() != J) throw InvalidParameters("calibration target needs one share per agent");
    double sum = 0.0;
    for (double s : shares) {
      if (!(s > 0.0) || !(s <= 1.0)) throw InvalidParameters("calibration shares must lie in (0, 1]");
      sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidParameters("calibration shares must sum to 1");
    if (J > 1 && std::any_of(shares.begin(), shares.end(), [](double s) { return s >= 1.0; }))
      throw InvalidParameters("calibration shares must lie in (0, 1) when J > 1");
  }
};

struct CalibrationOptions {
  double tol = 1e-10;
  int max_iter = 500;
  double damping = 0.5;
  double fd_step = 1e-6;
  /// Switch to Newton when the residual has not halved over this many sweeps.
  int stall_window = 10;
  int max_halvings = 30;
};

struct CalibrationResult {
  std::vector<double> gamma;
  std::vector<double> achieved_shares;
  double residual = 0.0;
  int iterations = 0;
  bool used_newton = false;
};

/// w^j / S for every agent at a state: Z^j / Z.
inline std::vector<double> wealth_shares(const MarketState& s, const DenominatorTable& tab) {
  const double log_z = log_price_kernel_sum(s, tab);
  std::vector<double> out(tab.params().num_agents());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::exp(log_wealth_kernel_sum(s, tab, j) - log_z);
  return out;
}

namespace detail {

inline void center(std::vector<double>& g) {
  const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
  for (double& v : g) v -= mean;
}

inline EconomyParams with_gamma(EconomyParams p, const std::vector<double>& gamma) {
  for (std::size_t j = 0; j < p.agents.size(); ++j) p.agents[j].gamma = gamma[j];
  return p;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace detail

/// Agent gammas in `params` are ignored; the solve starts from gamma = 0.
inline CalibrationResult solve_gamma(const EconomyParams& params, const CalibrationTarget& target,
                                     const CalibrationOptions& opt = {}) {
  params.check();
  const std::size_t J = params.num_agents();
  target.check(J);
  const double R = params.R;

  // Denominators do not involve gamma, but every iterate is still revalidated
  // so a rejected point is handled the same way whatever the table contains.
  auto shares_at = [&](const std::vector<double>& g) -> std::optional<std::vector<double>> {
    try {
      const auto tab = validate(detail::with_gamma(params, g));
      return wealth_shares(target.state, tab);
    } catch (const NonpositiveDenominator&) {
      return std::nullopt;
    }
  };

  CalibrationResult res;
  std::vector<double> gamma(J, 0.0);
  auto cur = shares_at(gamma);
  if (!cur) throw ValidationLost("initial guess gamma = 0 does not validate");
  double residual = detail::max_abs_diff(*cur, target.shares);

  // Accepts candidate if it validates and does not increase the residual;
  // otherwise halves the step from gamma toward candidate.
  auto take_step = [&](const std::vector<double>& step) {
    double scale = 1.0;
    for (int h = 0; h <= opt.max_halvings; ++h, scale *= 0.5) {
      std::vector<double> cand(J);
      for (std::size_t j = 0; j < J; ++j) cand[j] = gamma[j] + scale * step[j];
      detail::center(cand);
      auto sh = shares_at(cand);
      if (!sh) continue;
      const double r = detail::max_abs_diff(*sh, target.shares);
      if (r <= residual || h == opt.max_halvings) {
        gamma = std::move(cand);
        cur = std::move(sh);
        residual = r;
        return;
      }
    }
    throw ValidationLost("step halving could not find a validated calibration iterate");
  };

  std::vector<double> history{residual};
  bool newton = false;
  while (residual > opt.tol && res.iterations < opt.max_iter) {
    ++res.iterations;
    if (!newton) {
      std::vector<double> step(J);
      for (std::size_t j = 0; j < J; ++j) step[j] = opt.damping * R * std::log((*cur)[j] / target.shares[j]);
      take_step(step);
      history.push_back(residual);
      const auto w = static_cast<std::size_t>(opt.stall_window);
      if (history.size() > w && residual > 0.5 * history[history.size() - 1 - w]) newton = true;
      continue;
    }

    // Newton on the first J-1 shares in the coordinates gamma_1..gamma_{J-1},
    // gamma_J = -sum of the others.
    res.used_newton = true;
    const std::size_t n = J - 1;
    auto reduced_residual = [&](const std::vector<double>& sh) {
      Eigen::VectorXd f(n);
      for (std::size_t i = 0; i < n; ++i) f[i] = sh[i] - target.shares[i];
      return f;
    };
    auto full_from = [&](const Eigen::VectorXd& u) {
      std::vector<double> g(J);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += (g[i] = u[i]);
      g[n] = -s;
      return g;
    };
    Eigen::VectorXd u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = gamma[i];
    const Eigen::VectorXd f0 = reduced_residual(*cur);
    Eigen::MatrixXd jac(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      Eigen::VectorXd up = u, um = u;
      up[k] += opt.fd_step;
      um[k] -= opt.fd_step;
      const auto sp = shares_at(full_from(up));
      const auto sm = shares_at(full_from(um));
      if (!sp || !sm) throw ValidationLost("finite-difference Jacobian left the validated region");
      jac.col(static_cast<Eigen::Index>(k)) = (reduced_residual(*sp) - reduced_residual(*sm)) / (2.0 * opt.fd_step);
    }
    const Eigen::VectorXd du = jac.fullPivLu().solve(-f0);
    const auto target_gamma = full_from(u + du);
    std::vector<double> step(J);
    for (std::size_t j = 0; j < J; ++j) step[j] = target_gamma[j] - gamma[j];
    take_step(step);
  }

  if (residual > opt.tol) throw NoConvergence(res.iterations, residual);
  res.gamma = gamma;
  res.achieved_shares = *cur;
  res.residual = residual;
  return res;
}

}  // namespace hbeliefs
