#pragma once

// Level quantities of the equilibrium: state price density, consumption,
// wealth, stock price and price-dividend ratio. Everything is accumulated in
// log space because the exponents grow linearly in t and x.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "hbeliefs/model.hpp"
#include "hbeliefs/numerics.hpp"

namespace hbeliefs {

/// y_i = (-rho_i t - gamma_i + alpha_i X_t - alpha_i^2 t / 2) / R,
/// i.e. the log of (e^{-rho_i t} Lambda^i_t / nu_i)^{1/R}.
inline std::vector<double> agent_log_terms(const MarketState& s, const EconomyParams& p) {
  std::vector<double> y(p.num_agents());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto& a = p.agents[i];
    y[i] = (-a.rho * s.t - a.gamma + log_lambda(s, a)) / p.R;
  }
  return y;
}

/// log(delta_t^R zeta_t) = R * logsumexp_i(y_i)
inline double log_aggregate_weight(const MarketState& s, const EconomyParams& p) {
  const auto y = agent_log_terms(s, p);
  return p.R * logsumexp(y);
}

inline double log_state_price_density(const MarketState& s, const EconomyParams& p) {
  return -p.R * log_dividend(s, p) + log_aggregate_weight(s, p);
}

/// zeta_t = delta_t^{-R} (sum_i (e^{-rho_i t} Lambda^i_t / nu_i)^{1/R})^R
inline double state_price_density(const MarketState& s, const EconomyParams& p) {
  return std::exp(log_state_price_density(s, p));
}

/// Consumption of every agent: delta_t times the softmax of y.
inline std::vector<double> consumptions(const MarketState& s, const EconomyParams& p) {
  auto c = softmax(agent_log_terms(s, p));
  const double d = dividend(s, p);
  for (double& v : c) v *= d;
  return c;
}

inline double consumption(const MarketState& s, const EconomyParams& p, std::size_t j) {
  if (j >= p.num_agents()) throw std::out_of_range("consumption: agent index");
  return consumptions(s, p)[j];
}

namespace detail {

/// log of each |beta| = R term of Z_t: log C(R,beta) + exponent - log D(beta).
inline std::vector<double> price_log_terms(const MarketState& s, const DenominatorTable& tab) {
  const auto terms = tab.terms();
  std::vector<double> out(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k)
    out[k] = terms[k].log_coefficient + terms[k].exponent(s) - terms[k].log_denominator;
  return out;
}

/// log of each |beta'| = R - 1 term of Z^j_t.
inline std::vector<double> wealth_log_terms(const MarketState& s, const DenominatorTable& tab, std::size_t j) {
  const auto terms = tab.terms();
  const auto agent = tab.agent_terms(j);
  std::vector<double> out(agent.size());
  for (std::size_t k = 0; k < agent.size(); ++k) {
    const auto& full = terms[agent[k].full_index];
    out[k] = agent[k].log_coefficient + full.exponent(s) - full.log_denominator;
  }
  return out;
}

}  // namespace detail

/// log Z_t = log sum_{|beta|=R} C(R,beta) exp(...) / D(beta)
inline double log_price_kernel_sum(const MarketState& s, const DenominatorTable& tab) {
  return logsumexp(detail::price_log_terms(s, tab));
}

/// log Z^j_t = log sum_{|beta'|=R-1} C(R-1,beta') exp(...) / D(beta'+e_j)
inline double log_wealth_kernel_sum(const MarketState& s, const DenominatorTable& tab, std::size_t j) {
  return logsumexp(detail::wealth_log_terms(s, tab, j));
}

/// Wealth of agent j. delta^{1-R} zeta^{-1} = delta / (delta^R zeta), so
/// log w = log delta + log Z^j - log(delta^R zeta).
inline double wealth(const MarketState& s, const DenominatorTable& tab, std::size_t j) {
  const auto& p = tab.params();
  if (j >= p.num_agents()) throw std::out_of_range("wealth: agent index");
  return std::exp(log_dividend(s, p) + log_wealth_kernel_sum(s, tab, j) - log_aggregate_weight(s, p));
}

inline std::vector<double> wealths(const MarketState& s, const DenominatorTable& tab) {
  const auto& p = tab.params();
  const double base = log_dividend(s, p) - log_aggregate_weight(s, p);
  std::vector<double> w(p.num_agents());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = std::exp(base + log_wealth_kernel_sum(s, tab, j));
  return w;
}

inline double log_stock_price(const MarketState& s, const DenominatorTable& tab) {
  const auto& p = tab.params();
  return log_dividend(s, p) + log_price_kernel_sum(s, tab) - log_aggregate_weight(s, p);
}

/// S_t = delta_t^{1-R} zeta_t^{-1} sum_{|beta|=R} C(R,beta) exp(...) / D(beta)
inline double stock_price(const MarketState& s, const DenominatorTable& tab) {
  return std::exp(log_stock_price(s, tab));
}

/// S_t / delta_t = (sum_i e^{y_i})^{-R} sum_{|beta|=R} C(R,beta) exp(...) / D(beta)
inline double pd_ratio(const MarketState& s, const DenominatorTable& tab) {
  return std::exp(log_price_kernel_sum(s, tab) - log_aggregate_weight(s, tab.params()));
}

}  // namespace hbeliefs
