#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hbeliefs/errors.hpp"
#include "hbeliefs/multiindex.hpp"

namespace hbeliefs {

/// One agent. gamma is log of the agent weight; the weight itself is never formed.
struct Agent {
  double rho = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;

  bool operator==(const Agent&) const = default;
};

struct EconomyParams {
  int R = 2;
  double sigma = 0.1;
  double alpha_star = 0.0;
  double delta0 = 1.0;
  std::vector<Agent> agents;

  std::size_t num_agents() const noexcept { return agents.size(); }

  /// Throws InvalidParameters on structural problems.
  void check() const {
    if (R < 2) throw InvalidParameters("model requires integer R >= 2 (got " + std::to_string(R) + ")");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidParameters("sigma must be positive and finite");
    if (!(delta0 > 0.0) || !std::isfinite(delta0)) throw InvalidParameters("delta0 must be positive and finite");
    if (!std::isfinite(alpha_star)) throw InvalidParameters("alpha_star must be finite");
    if (agents.empty()) throw InvalidParameters("economy needs at least one agent");
    for (std::size_t j = 0; j < agents.size(); ++j) {
      const auto& a = agents[j];
      if (!std::isfinite(a.rho) || !std::isfinite(a.alpha) || !std::isfinite(a.gamma))
        throw InvalidParameters("agent " + std::to_string(j) + " has a non-finite parameter");
    }
  }

  bool operator==(const EconomyParams&) const = default;
};

/// (t, X_t). Every equilibrium quantity is a function of this pair.
struct MarketState {
  double t = 0.0;
  double x = 0.0;

  bool operator==(const MarketState&) const = default;
};

/// One composition beta with |beta| = R and its per-economy scalars.
struct CompositionTerm {
  MultiIndex beta;
  double log_coefficient = 0.0;  // log C(R, beta)
  double slope = 0.0;            // alpha.beta / R
  double decay = 0.0;            // rho.beta / R + alpha^2.beta / (2R)
  double offset = 0.0;           // gamma.beta / R
  double denominator = 0.0;      // D(beta)
  double log_denominator = 0.0;

  /// Exponent of the beta-term at a state: slope*x - offset - decay*t.
  double exponent(const MarketState& s) const noexcept { return slope * s.x - offset - decay * s.t; }
};

/// Wealth term (beta', j) with |beta'| = R - 1. Its exponent and denominator
/// are those of beta' + e_j in the full table; only the coefficient differs.
struct AgentTerm {
  std::size_t full_index = 0;
  double log_coefficient = 0.0;  // log C(R-1, beta')
};

/// D(beta) = rho.beta/R + alpha^2.beta/(2R) + (sigma^2/2 - alpha* sigma)(1-R)
///           - (alpha.beta/R + (1-R) sigma)^2 / 2
inline double discount_denominator(const EconomyParams& p, const MultiIndex& beta) {
  const double R = p.R;
  double rb = 0.0, ab = 0.0, a2b = 0.0;
  for (std::size_t i = 0; i < beta.parts.size(); ++i) {
    const double b = beta.parts[i];
    rb += p.agents[i].rho * b;
    ab += p.agents[i].alpha * b;
    a2b += p.agents[i].alpha * p.agents[i].alpha * b;
  }
  const double drift = (0.5 * p.sigma * p.sigma - p.alpha_star * p.sigma) * (1.0 - R);
  const double loading = ab / R + (1.0 - R) * p.sigma;
  return rb / R + a2b / (2.0 * R) + drift - 0.5 * loading * loading;
}

/// Left side of the sufficient finiteness condition; the condition holds when >= 0.
inline double footnote_margin(const EconomyParams& p) {
  const double R = p.R;
  double min_term = std::numeric_limits<double>::infinity();
  double max_sq = 0.0;
  for (const auto& a : p.agents) {
    min_term = std::min(min_term, a.rho + 0.5 * a.alpha * a.alpha);
    const double d = (R - 1.0) * p.sigma - a.alpha;
    max_sq = std::max(max_sq, d * d);
  }
  return min_term + (0.5 * p.sigma * p.sigma - p.alpha_star * p.sigma) * (1.0 - R) - 0.5 * max_sq;
}

class DenominatorTable;
DenominatorTable validate(const EconomyParams& params, std::size_t cap);

/// Per-economy precomputation: all |beta| = R compositions with D(beta) > 0,
/// plus the |beta'| = R - 1 wealth terms for each agent.
class DenominatorTable {
 public:
  const EconomyParams& params() const noexcept { return params_; }
  std::span<const CompositionTerm> terms() const noexcept { return terms_; }
  std::span<const AgentTerm> agent_terms(std::size_t j) const { return agent_terms_.at(j); }

  double denominator(const MultiIndex& beta) const { return terms_.at(index_.at(beta.parts)).denominator; }

  double min_denominator() const noexcept { return min_d_; }
  double max_denominator() const noexcept { return max_d_; }
  double footnote_margin() const noexcept { return footnote_margin_; }
  bool footnote_condition_holds() const noexcept { return footnote_margin_ >= 0.0; }

  bool operator==(const DenominatorTable& o) const {
    if (!(params_ == o.params_) || terms_.size() != o.terms_.size()) return false;
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (!(terms_[i].beta == o.terms_[i].beta) || terms_[i].denominator != o.terms_[i].denominator)
        return false;
    return true;
  }

 private:
  friend DenominatorTable validate(const EconomyParams& params, std::size_t cap);

  EconomyParams params_;
  std::vector<CompositionTerm> terms_;
  std::vector<std::vector<AgentTerm>> agent_terms_;
  std::map<std::vector<int>, std::size_t> index_;
  double min_d_ = 0.0;
  double max_d_ = 0.0;
  double footnote_margin_ = 0.0;
};

/// Builds the denominator table, throwing NonpositiveDenominator (listing
/// every offending composition) unless D(beta) > 0 for all |beta| = R.
/// The footnote condition is recorded but is not the gate.
inline DenominatorTable validate(const EconomyParams& params, std::size_t cap = kDefaultCompositionCap) {
  params.check();
  const int J = static_cast<int>(params.num_agents());
  const double R = params.R;

  DenominatorTable table;
  table.params_ = params;
  auto full = enumerate_compositions(J, params.R, cap);
  table.terms_.reserve(full.size());

  std::vector<OffendingComposition> offending;
  double min_d = std::numeric_limits<double>::infinity();
  double max_d = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < full.size(); ++k) {
    const auto& beta = full[k];
    CompositionTerm term;
    double rb = 0.0, ab = 0.0, a2b = 0.0, gb = 0.0;
    for (std::size_t i = 0; i < beta.parts.size(); ++i) {
      const auto& a = params.agents[i];
      const double b = beta.parts[i];
      rb += a.rho * b;
      ab += a.alpha * b;
      a2b += a.alpha * a.alpha * b;
      gb += a.gamma * b;
    }
    term.log_coefficient = log_multinomial_coefficient(beta);
    term.slope = ab / R;
    term.decay = rb / R + a2b / (2.0 * R);
    term.offset = gb / R;
    term.denominator = discount_denominator(params, beta);
    if (!(term.denominator > 0.0) || !std::isfinite(term.denominator))
      offending.push_back({beta.parts, term.denominator});
    term.log_denominator = std::log(term.denominator);
    min_d = std::min(min_d, term.denominator);
    max_d = std::max(max_d, term.denominator);
    table.index_.emplace(beta.parts, k);
    term.beta = beta;
    table.terms_.push_back(std::move(term));
  }
  if (!offending.empty()) throw NonpositiveDenominator(std::move(offending));

  const auto reduced = enumerate_compositions(J, params.R - 1, cap);
  table.agent_terms_.resize(params.num_agents());
  for (std::size_t j = 0; j < params.num_agents(); ++j) {
    auto& list = table.agent_terms_[j];
    list.reserve(reduced.size());
    for (const auto& bp : reduced)
      list.push_back({table.index_.at(add_unit(bp, j).parts), log_multinomial_coefficient(bp)});
  }

  table.min_d_ = min_d;
  table.max_d_ = max_d;
  table.footnote_margin_ = footnote_margin(params);
  return table;
}

/// log Lambda^j_t = alpha_j X_t - alpha_j^2 t / 2
inline double log_lambda(const MarketState& s, const Agent& a) noexcept {
  return a.alpha * s.x - 0.5 * a.alpha * a.alpha * s.t;
}

/// Change-of-measure martingale of one agent, Lambda_0 = 1.
inline double lambda_j(const MarketState& s, const Agent& a) noexcept { return std::exp(log_lambda(s, a)); }

inline double log_dividend(const MarketState& s, const EconomyParams& p) noexcept {
  return std::log(p.delta0) + p.sigma * s.x + (p.alpha_star * p.sigma - 0.5 * p.sigma * p.sigma) * s.t;
}

/// delta_t = delta_0 exp(sigma X_t + (alpha* sigma - sigma^2/2) t)
inline double dividend(const MarketState& s, const EconomyParams& p) noexcept {
  return std::exp(log_dividend(s, p));
}

}  // namespace hbeliefs
