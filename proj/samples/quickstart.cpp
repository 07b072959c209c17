// Evaluate a two-agent economy at a few states and print the headline numbers.
#include <cstdio>

#include "hbeliefs/snapshot.hpp"

int main() {
  hbeliefs::EconomyParams p;
  p.R = 3;
  p.sigma = 0.1;
  p.alpha_star = 0.02;
  p.delta0 = 1.0;
  p.agents = {{0.12, 0.3, 0.0}, {0.12, -0.3, 0.0}};

  const auto table = hbeliefs::validate(p);
  std::printf("%6s %6s %10s %10s %10s %10s\n", "t", "x", "S", "P/D", "r", "sigma_S");
  for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    const auto s = hbeliefs::snapshot({1.0, x}, table);
    std::printf("%6.2f %6.2f %10.4f %10.4f %10.5f %10.5f\n", s.state.t, s.state.x, s.stock_price, s.pd_ratio,
                s.rates.riskless_rate, s.stock.vol);
  }
}
