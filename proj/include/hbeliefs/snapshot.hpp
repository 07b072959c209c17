#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hbeliefs/dynamics.hpp"
#include "hbeliefs/equilibrium.hpp"
#include "hbeliefs/model.hpp"

namespace hbeliefs {

/// Everything evaluated at one state.
struct EquilibriumSnapshot {
  MarketState state;
  double zeta = 0.0;
  double dividend = 0.0;
  std::vector<double> consumptions;
  std::vector<double> wealths;
  double stock_price = 0.0;
  double pd_ratio = 0.0;
  RateBundle rates;
  StockDynamics stock;
  std::vector<double> agent_alpha_tilde;
  std::vector<double> portfolios;

  bool operator==(const EquilibriumSnapshot&) const = default;
};

/// Throws DegenerateStockVolatility if portfolios are undefined at this state.
inline EquilibriumSnapshot snapshot(const MarketState& s, const DenominatorTable& tab) {
  const auto& p = tab.params();
  const std::size_t J = p.num_agents();

  EquilibriumSnapshot snap;
  snap.state = s;
  const double log_div = log_dividend(s, p);
  const double log_agg = log_aggregate_weight(s, p);
  const double log_z = log_price_kernel_sum(s, tab);
  snap.dividend = std::exp(log_div);
  snap.zeta = std::exp(log_agg - p.R * log_div);
  snap.consumptions = consumptions(s, p);
  snap.stock_price = std::exp(log_div + log_z - log_agg);
  snap.pd_ratio = std::exp(log_z - log_agg);
  snap.rates = rate_bundle(s, tab);
  snap.stock = stock_dynamics(s, tab, snap.rates);
  if (std::abs(snap.stock.vol) < kDegenerateVolatility) throw DegenerateStockVolatility(snap.stock.vol);

  snap.wealths.resize(J);
  snap.agent_alpha_tilde.resize(J);
  snap.portfolios.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    const double log_zj = log_wealth_kernel_sum(s, tab, j);
    snap.wealths[j] = std::exp(log_div + log_zj - log_agg);
    snap.agent_alpha_tilde[j] = agent_alpha_tilde(s, tab, j);
    snap.portfolios[j] = std::exp(log_zj - log_z) * (p.sigma + snap.agent_alpha_tilde[j] - snap.rates.alpha_bar) /
                         snap.stock.vol;
  }
  return snap;
}

}  // namespace hbeliefs
