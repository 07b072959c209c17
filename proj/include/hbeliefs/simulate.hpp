#pragma once

// Brownian driver paths and the stochastic oracles that check the closed
// forms: Monte Carlo wealth and stock prices, the discounted-gains
// martingale, realized volatility, and a central-difference engine.
//
// Every path draws from its own substream keyed by (seed, path index), and
// per-path results are reduced in path order, so outputs do not depend on
// the number of paths requested before them or on the thread count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hbeliefs/dynamics.hpp"
#include "hbeliefs/equilibrium.hpp"
#include "hbeliefs/errors.hpp"
#include "hbeliefs/model.hpp"
#include "hbeliefs/snapshot.hpp"

namespace hbeliefs {

struct PathGrid {
  double t0 = 0.0;
  double horizon = 1.0;
  std::size_t n_steps = 1;

  double dt() const noexcept { return (horizon - t0) / static_cast<double>(n_steps); }
  double time(std::size_t k) const noexcept {
    return k == n_steps ? horizon : t0 + static_cast<double>(k) * dt();
  }
  void check() const {
    if (!(t0 >= 0.0) || !(horizon > t0) || n_steps == 0 || !std::isfinite(horizon))
      throw InvalidParameters("path grid needs 0 <= t0 < horizon and n_steps >= 1");
  }
};

struct SimulatedPath {
  PathGrid grid;
  std::vector<double> x_values;  // one per grid node
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
};

struct OracleReport {
  double estimate = 0.0;
  double std_error = 0.0;
  double closed_form = 0.0;
  double z_score = 0.0;
  std::size_t n_paths = 0;
  double truncation_bound = 0.0;
};

struct RealizedVolReport {
  double residual_mean = 0.0;
  double mean_std_error = 0.0;
  double residual_variance = 0.0;
  double variance_std_error = 0.0;
  std::size_t n_increments = 0;
};

/// Zero horizon or n_steps means "derive from the denominator table".
struct MonteCarloSettings {
  std::size_t n_paths = 100'000;
  double horizon = 0.0;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct RealizedVolSettings {
  PathGrid grid{0.0, 0.05, 500};
  double x0 = 0.0;
  std::size_t n_paths = 200;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// tail factor e^{-D_min (T - t)} at the default horizon is e^{-10}
inline constexpr double kTailDecayUnits = 10.0;
inline constexpr double kMinHorizonSpan = 10.0;
// D_max * dt at the default step; trapezoid bias on e^{-Du} is ~ (D dt)^2 / 12
inline constexpr double kQuadratureResolution = 0.05;

inline double default_horizon_span(const DenominatorTable& tab) {
  return std::max(kMinHorizonSpan, kTailDecayUnits / tab.min_denominator());
}

inline std::size_t default_step_count(const DenominatorTable& tab, double span) {
  const double dt = std::min(1.0, kQuadratureResolution / tab.max_denominator());
  return static_cast<std::size_t>(std::ceil(span / dt));
}

/// Largest k^2 / D over compositions, where k is the x-slope of the
/// discounted payout term and D its decay rate. Above 2 the per-time second
/// moment of the oracle integrand is infinite and z-scores are meaningless;
/// below 2/3 the fourth moment is finite too.
inline double oracle_moment_ratio(const DenominatorTable& tab) {
  const auto& p = tab.params();
  double worst = 0.0;
  for (const auto& term : tab.terms()) {
    const double k = term.slope + (1.0 - p.R) * p.sigma;
    worst = std::max(worst, k * k / term.denominator);
  }
  return worst;
}

/// Engine for one path's substream.
inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path_index), static_cast<std::uint32_t>(path_index >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

/// Fills x with X at every grid node; increments are exact N(0, dt) draws.
inline void fill_brownian_path(const PathGrid& grid, double x0, std::uint64_t seed, std::uint64_t path_index,
                               std::vector<double>& x) {
  auto eng = path_engine(seed, path_index);
  std::normal_distribution<double> normal(0.0, 1.0);
  x.resize(grid.n_steps + 1);
  x[0] = x0;
  for (std::size_t k = 1; k <= grid.n_steps; ++k) {
    const double dt = grid.time(k) - grid.time(k - 1);
    x[k] = x[k - 1] + std::sqrt(dt) * normal(eng);
  }
}

inline std::vector<SimulatedPath> simulate_paths(const PathGrid& grid, double x0, std::size_t n_paths,
                                                 std::uint64_t seed) {
  grid.check();
  std::vector<SimulatedPath> out(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    out[i].grid = grid;
    out[i].seed = seed;
    out[i].path_index = i;
    fill_brownian_path(grid, x0, seed, i, out[i].x_values);
  }
  return out;
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers; results in index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, unsigned threads, Fn&& fn) {
  std::vector<T> out(n);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

struct SampleMoments {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Two-pass mean and standard error in index order.
inline SampleMoments sample_moments(const std::vector<double>& v) {
  SampleMoments m;
  if (v.empty()) return m;
  double s = 0.0;
  for (double e : v) s += e;
  m.mean = s / static_cast<double>(v.size());
  if (v.size() < 2) return m;
  double ss = 0.0;
  for (double e : v) ss += (e - m.mean) * (e - m.mean);
  m.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return m;
}

inline OracleReport make_report(const std::vector<double>& samples, double closed_form, double tail_bound) {
  const auto m = sample_moments(samples);
  OracleReport r;
  r.estimate = m.mean;
  r.std_error = m.std_error;
  r.closed_form = closed_form;
  r.n_paths = samples.size();
  r.truncation_bound = tail_bound;
  if (m.std_error > 0.0)
    r.z_score = (m.mean - closed_form) / m.std_error;
  else
    r.z_score = m.mean == closed_form ? 0.0 : std::copysign(INFINITY, m.mean - closed_form);
  return r;
}

/// One time series row per grid node along a path.
inline std::vector<EquilibriumSnapshot> evaluate_series(const SimulatedPath& path, const DenominatorTable& tab) {
  std::vector<EquilibriumSnapshot> out;
  out.reserve(path.x_values.size());
  for (std::size_t k = 0; k < path.x_values.size(); ++k) {
    try {
      out.push_back(snapshot({path.grid.time(k), path.x_values[k]}, tab));
    } catch (const DegenerateStockVolatility& e) {
      throw DegenerateStockVolatility(e.volatility(), k);
    }
  }
  return out;
}

namespace detail {

/// y_i(t, x) = base_i + slope_i x - decay_i t, as in agent_log_terms, without allocation.
class AgentTermEvaluator {
 public:
  explicit AgentTermEvaluator(const EconomyParams& p) {
    for (const auto& a : p.agents) {
      base_.push_back(-a.gamma / p.R);
      slope_.push_back(a.alpha / p.R);
      decay_.push_back((a.rho + 0.5 * a.alpha * a.alpha) / p.R);
    }
  }

  /// Fills y and returns logsumexp(y).
  double evaluate(double t, double x, std::vector<double>& y) const {
    y.resize(base_.size());
    double m = -INFINITY;
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = base_[i] + slope_[i] * x - decay_[i] * t;
      m = std::max(m, y[i]);
    }
    double s = 0.0;
    for (double v : y) s += std::exp(v - m);
    return m + std::log(s);
  }

 private:
  std::vector<double> base_, slope_, decay_;
};

/// Integral over the grid of exp(log_integrand(t, x)) by the trapezoid rule.
template <class LogIntegrand>
double trapezoid_along(const PathGrid& grid, const std::vector<double>& x, LogIntegrand&& log_integrand) {
  double acc = 0.0;
  double prev = std::exp(log_integrand(grid.time(0), x[0]));
  for (std::size_t k = 1; k <= grid.n_steps; ++k) {
    const double cur = std::exp(log_integrand(grid.time(k), x[k]));
    acc += 0.5 * (prev + cur) * (grid.time(k) - grid.time(k - 1));
    prev = cur;
  }
  return acc;
}

inline PathGrid oracle_grid(const MarketState& s, const DenominatorTable& tab, const MonteCarloSettings& cfg) {
  PathGrid g;
  g.t0 = s.t;
  g.horizon = cfg.horizon > 0.0 ? cfg.horizon : s.t + default_horizon_span(tab);
  if (!(g.horizon > s.t)) throw InvalidParameters("oracle horizon must exceed the state time");
  g.n_steps = cfg.n_steps > 0 ? cfg.n_steps : default_step_count(tab, g.horizon - s.t);
  g.check();
  return g;
}

}  // namespace detail

/// Monte Carlo of w^j_t = zeta_t^{-1} E_t[int_t^T c^j_u zeta_u du], with the
/// integrand evaluated from the agent-sum form of zeta and c (not from the
/// composition sums), plus the exact tail of the closed form past T as the
/// reported truncation bound.
inline OracleReport mc_wealth_oracle(const MarketState& s, const DenominatorTable& tab, std::size_t j,
                                     const MonteCarloSettings& cfg = {}) {
  const auto& p = tab.params();
  if (j >= p.num_agents()) throw std::out_of_range("mc_wealth_oracle: agent index");
  const auto grid = detail::oracle_grid(s, tab, cfg);

  const double log_zeta_t = log_state_price_density(s, p);
  const double log_div_t = log_dividend(s, p);
  const double log_agg_t = log_aggregate_weight(s, p);
  const auto terms = tab.terms();
  const auto agent = tab.agent_terms(j);
  const auto wlog = detail::wealth_log_terms(s, tab, j);
  double closed = 0.0, tail = 0.0;
  for (std::size_t k = 0; k < agent.size(); ++k) {
    const double piece = std::exp(log_div_t + wlog[k] - log_agg_t);
    closed += piece;
    tail += piece * std::exp(-terms[agent[k].full_index].denominator * (grid.horizon - s.t));
  }
  if (tail > 0.1 * closed) throw TruncationTooLoose(tail, closed);

  const detail::AgentTermEvaluator eval(p);
  const double R = p.R;
  auto samples = parallel_map<double>(cfg.n_paths, cfg.threads, [&](std::size_t i) {
    std::vector<double> x, y;
    fill_brownian_path(grid, s.x, cfg.seed, i, x);
    return detail::trapezoid_along(grid, x, [&](double t, double xv) {
      const double lse = eval.evaluate(t, xv, y);
      return (1.0 - R) * log_dividend({t, xv}, p) + y[j] + (R - 1.0) * lse - log_zeta_t;
    });
  });
  return make_report(samples, closed, tail);
}

/// Monte Carlo of S_t = zeta_t^{-1} E_t[int_t^T zeta_u delta_u du].
inline OracleReport mc_stock_oracle(const MarketState& s, const DenominatorTable& tab,
                                    const MonteCarloSettings& cfg = {}) {
  const auto& p = tab.params();
  const auto grid = detail::oracle_grid(s, tab, cfg);

  const double log_zeta_t = log_state_price_density(s, p);
  const double log_div_t = log_dividend(s, p);
  const double log_agg_t = log_aggregate_weight(s, p);
  const auto terms = tab.terms();
  const auto plog = detail::price_log_terms(s, tab);
  double closed = 0.0, tail = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const double piece = std::exp(log_div_t + plog[k] - log_agg_t);
    closed += piece;
    tail += piece * std::exp(-terms[k].denominator * (grid.horizon - s.t));
  }
  if (tail > 0.1 * closed) throw TruncationTooLoose(tail, closed);

  const detail::AgentTermEvaluator eval(p);
  const double R = p.R;
  auto samples = parallel_map<double>(cfg.n_paths, cfg.threads, [&](std::size_t i) {
    std::vector<double> x, y;
    fill_brownian_path(grid, s.x, cfg.seed, i, x);
    return detail::trapezoid_along(grid, x, [&](double t, double xv) {
      const double lse = eval.evaluate(t, xv, y);
      return (1.0 - R) * log_dividend({t, xv}, p) + R * lse - log_zeta_t;
    });
  });
  return make_report(samples, closed, tail);
}

/// E[zeta_T S_T + int_0^T zeta_u delta_u du] = zeta_0 S_0 from (t, x) = (0, 0).
/// Both sides are divided by zeta_0, so closed_form is S_0.
inline OracleReport martingale_check(const DenominatorTable& tab, double horizon, std::size_t n_steps,
                                     std::size_t n_paths, std::uint64_t seed, unsigned threads = 1) {
  const auto& p = tab.params();
  const MarketState origin{0.0, 0.0};
  const PathGrid grid{0.0, horizon, n_steps};
  grid.check();
  const double log_zeta0 = log_state_price_density(origin, p);
  const double s0 = stock_price(origin, tab);

  const detail::AgentTermEvaluator eval(p);
  const double R = p.R;
  auto samples = parallel_map<double>(n_paths, threads, [&](std::size_t i) {
    std::vector<double> x, y;
    fill_brownian_path(grid, 0.0, seed, i, x);
    const double dividends = detail::trapezoid_along(grid, x, [&](double t, double xv) {
      const double lse = eval.evaluate(t, xv, y);
      return (1.0 - R) * log_dividend({t, xv}, p) + R * lse - log_zeta0;
    });
    const MarketState end{grid.horizon, x.back()};
    return dividends + std::exp(log_state_price_density(end, p) + log_stock_price(end, tab) - log_zeta0);
  });
  return make_report(samples, s0, 0.0);
}

/// Normalized log-price residuals (dlog S - (mu - vol^2/2) dt) / (vol sqrt(dt))
/// along simulated paths, using the closed-form vol and drift at the left node.
inline RealizedVolReport realized_vol_check(const DenominatorTable& tab, const RealizedVolSettings& cfg) {
  cfg.grid.check();
  struct PathSums {
    double n = 0, s1 = 0, s2 = 0;
    std::vector<double> residuals;
  };
  auto per_path = parallel_map<PathSums>(cfg.n_paths, cfg.threads, [&](std::size_t i) {
    std::vector<double> x;
    fill_brownian_path(cfg.grid, cfg.x0, cfg.seed, i, x);
    PathSums ps;
    ps.residuals.reserve(cfg.grid.n_steps);
    MarketState cur{cfg.grid.time(0), x[0]};
    double log_s = log_stock_price(cur, tab);
    for (std::size_t k = 1; k <= cfg.grid.n_steps; ++k) {
      const auto sd = stock_dynamics(cur, tab);
      const MarketState next{cfg.grid.time(k), x[k]};
      const double log_s_next = log_stock_price(next, tab);
      const double dt = next.t - cur.t;
      const double res = (log_s_next - log_s - (sd.drift - 0.5 * sd.vol * sd.vol) * dt) / (sd.vol * std::sqrt(dt));
      ps.residuals.push_back(res);
      cur = next;
      log_s = log_s_next;
    }
    return ps;
  });

  std::vector<double> all;
  all.reserve(cfg.n_paths * cfg.grid.n_steps);
  for (const auto& ps : per_path) all.insert(all.end(), ps.residuals.begin(), ps.residuals.end());

  RealizedVolReport rep;
  const double n = static_cast<double>(all.size());
  rep.n_increments = all.size();
  if (all.size() < 2) return rep;
  double s = 0.0;
  for (double r : all) s += r;
  const double mean = s / n;
  double m2 = 0.0, m4 = 0.0;
  for (double r : all) {
    const double d = (r - mean) * (r - mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  rep.residual_mean = mean;
  rep.mean_std_error = std::sqrt(m2 / n);
  rep.residual_variance = m2 * n / (n - 1.0);
  rep.variance_std_error = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  return rep;
}

/// The second x-derivative gets its own, wider step: its rounding error
/// scales like eps |f| / h^2, which at h = 1e-4 is already ~1e-7 |f|.
struct FdSteps {
  double h_x = 1e-4;
  double h_t = 1e-5;
  double h_xx = 1e-3;
  bool richardson = false;
};

struct FdDerivatives {
  double d_t = 0.0;
  double d_x = 0.0;
  double d_xx = 0.0;
};

namespace detail {

template <class Field>
FdDerivatives fd_raw(Field& f, double t, double x, double hx, double ht, double hxx) {
  FdDerivatives d;
  const double f0 = f(t, x);
  d.d_x = (f(t, x + hx) - f(t, x - hx)) / (2.0 * hx);
  d.d_xx = (f(t, x + hxx) - 2.0 * f0 + f(t, x - hxx)) / (hxx * hxx);
  if (t >= ht) {
    d.d_t = (f(t + ht, x) - f(t - ht, x)) / (2.0 * ht);
  } else {
    // one-sided second-order stencil keeps t >= 0
    d.d_t = (-3.0 * f0 + 4.0 * f(t + ht, x) - f(t + 2.0 * ht, x)) / (2.0 * ht);
  }
  return d;
}

}  // namespace detail

/// Central differences of a scalar field f(t, x). With richardson set, the
/// h and h/2 estimates are combined to cancel the O(h^2) term.
template <class Field>
FdDerivatives fd_engine(Field&& f, const MarketState& s, const FdSteps& steps = {}) {
  auto coarse = detail::fd_raw(f, s.t, s.x, steps.h_x, steps.h_t, steps.h_xx);
  if (!steps.richardson) return coarse;
  auto fine = detail::fd_raw(f, s.t, s.x, 0.5 * steps.h_x, 0.5 * steps.h_t, 0.5 * steps.h_xx);
  auto extrapolate = [](double c, double fn) { return (4.0 * fn - c) / 3.0; };
  return {extrapolate(coarse.d_t, fine.d_t), extrapolate(coarse.d_x, fine.d_x),
          extrapolate(coarse.d_xx, fine.d_xx)};
}

}  // namespace hbeliefs
