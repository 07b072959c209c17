#pragma once

// Ito coefficients of L_t = delta_t^R zeta_t, Z_t (the price kernel sum) and
// Z^j_t (the wealth kernel sums), and what follows from them: riskless rate,
// market price of risk, stock volatility and drift, portfolios.
//
// All weighted averages are softmax means over log terms; numerator and
// denominator sums are never formed separately.

#include <cmath>
#include <cstddef>
#include <vector>

#include "hbeliefs/equilibrium.hpp"
#include "hbeliefs/errors.hpp"
#include "hbeliefs/model.hpp"
#include "hbeliefs/numerics.hpp"

namespace hbeliefs {

inline constexpr double kDegenerateVolatility = 1e-12;

struct RateBundle {
  double alpha_bar = 0.0;
  double rho_bar = 0.0;
  double riskless_rate = 0.0;
  double kappa = 0.0;

  bool operator==(const RateBundle&) const = default;
};

struct StockDynamics {
  double alpha_tilde = 0.0;
  double rho_tilde = 0.0;
  double vol = 0.0;    // sigma + alpha_tilde - alpha_bar
  double drift = 0.0;  // rho_bar - rho_tilde + sigma alpha* + (alpha_tilde - alpha_bar)(sigma - alpha_bar)

  bool operator==(const StockDynamics&) const = default;
};

namespace detail {

/// log C(R,beta) + exponent over |beta| = R; the terms of L_t.
inline std::vector<double> aggregate_log_terms(const MarketState& s, const DenominatorTable& tab) {
  const auto terms = tab.terms();
  std::vector<double> out(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) out[k] = terms[k].log_coefficient + terms[k].exponent(s);
  return out;
}

inline std::vector<double> slopes(const DenominatorTable& tab) {
  const auto terms = tab.terms();
  std::vector<double> out(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) out[k] = terms[k].slope;
  return out;
}

/// Per-term drift rate: rho.beta/R + alpha^2.beta/(2R) - (alpha.beta/R)^2 / 2
inline std::vector<double> drift_rates(const DenominatorTable& tab) {
  const auto terms = tab.terms();
  std::vector<double> out(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k)
    out[k] = terms[k].decay - 0.5 * terms[k].slope * terms[k].slope;
  return out;
}

}  // namespace detail

/// log L_t summed over compositions. Agrees with log_aggregate_weight, which
/// sums over agents instead, by the multinomial theorem.
inline double log_aggregate_composition_sum(const MarketState& s, const DenominatorTable& tab) {
  return logsumexp(detail::aggregate_log_terms(s, tab));
}

inline RateBundle rate_bundle(const MarketState& s, const DenominatorTable& tab) {
  const auto& p = tab.params();
  const auto logw = detail::aggregate_log_terms(s, tab);
  RateBundle rb;
  rb.alpha_bar = softmax_mean(logw, detail::slopes(tab));
  rb.rho_bar = softmax_mean(logw, detail::drift_rates(tab));
  const double R = p.R;
  rb.riskless_rate = rb.rho_bar + R * p.sigma * (p.alpha_star + rb.alpha_bar) -
                     0.5 * p.sigma * p.sigma * R * (R + 1.0);
  rb.kappa = R * p.sigma - rb.alpha_bar;
  return rb;
}

inline StockDynamics stock_dynamics(const MarketState& s, const DenominatorTable& tab, const RateBundle& rates) {
  const auto& p = tab.params();
  const auto logz = detail::price_log_terms(s, tab);
  StockDynamics sd;
  sd.alpha_tilde = softmax_mean(logz, detail::slopes(tab));
  sd.rho_tilde = softmax_mean(logz, detail::drift_rates(tab));
  const double excess = sd.alpha_tilde - rates.alpha_bar;
  sd.vol = p.sigma + excess;
  sd.drift = rates.rho_bar - sd.rho_tilde + p.sigma * p.alpha_star + excess * (p.sigma - rates.alpha_bar);
  return sd;
}

inline StockDynamics stock_dynamics(const MarketState& s, const DenominatorTable& tab) {
  return stock_dynamics(s, tab, rate_bundle(s, tab));
}

/// alpha_tilde^j: the Z^j-weighted mean of (alpha_j + alpha.beta')/R.
inline double agent_alpha_tilde(const MarketState& s, const DenominatorTable& tab, std::size_t j) {
  const auto terms = tab.terms();
  const auto agent = tab.agent_terms(j);
  const auto logw = detail::wealth_log_terms(s, tab, j);
  std::vector<double> slope(agent.size());
  for (std::size_t k = 0; k < agent.size(); ++k) slope[k] = terms[agent[k].full_index].slope;
  return softmax_mean(logw, slope);
}

/// Units of the risky asset held by every agent:
/// pi^j = w^j (sigma + alpha_tilde^j - alpha_bar) / (S (sigma + alpha_tilde - alpha_bar)).
inline std::vector<double> portfolios(const MarketState& s, const DenominatorTable& tab) {
  const auto& p = tab.params();
  const auto rates = rate_bundle(s, tab);
  const auto sd = stock_dynamics(s, tab, rates);
  if (std::abs(sd.vol) < kDegenerateVolatility) throw DegenerateStockVolatility(sd.vol);
  const double log_z = log_price_kernel_sum(s, tab);
  std::vector<double> pi(p.num_agents());
  for (std::size_t j = 0; j < pi.size(); ++j) {
    // w^j / S = Z^j / Z
    const double share = std::exp(log_wealth_kernel_sum(s, tab, j) - log_z);
    pi[j] = share * (p.sigma + agent_alpha_tilde(s, tab, j) - rates.alpha_bar) / sd.vol;
  }
  return pi;
}

inline double portfolio(const MarketState& s, const DenominatorTable& tab, std::size_t j) {
  if (j >= tab.params().num_agents()) throw std::out_of_range("portfolio: agent index");
  return portfolios(s, tab)[j];
}

}  // namespace hbeliefs
