#pragma once

#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hbeliefs {

/// Structurally invalid economy or option (bad R, nonpositive sigma, ...).
class InvalidParameters : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CompositionLimitExceeded : public std::length_error {
 public:
  CompositionLimitExceeded(std::size_t count, std::size_t cap)
      : std::length_error("composition count " + std::to_string(count) +
                          " exceeds cap " + std::to_string(cap)),
        count_(count),
        cap_(cap) {}

  std::size_t count() const noexcept { return count_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t count_;
  std::size_t cap_;
};

/// One composition whose discount denominator is not positive.
struct OffendingComposition {
  std::vector<int> beta;
  double denominator;
};

/// The wealth and price integrals diverge for at least one composition.
class NonpositiveDenominator : public std::domain_error {
 public:
  explicit NonpositiveDenominator(std::vector<OffendingComposition> offending)
      : std::domain_error(describe(offending)), offending_(std::move(offending)) {}

  const std::vector<OffendingComposition>& offending() const noexcept { return offending_; }

 private:
  static std::string describe(const std::vector<OffendingComposition>& off) {
    std::ostringstream os;
    os << "nonpositive denominator for " << off.size() << " composition(s):";
    for (const auto& o : off) {
      os << " (";
      for (std::size_t i = 0; i < o.beta.size(); ++i) os << (i ? "," : "") << o.beta[i];
      os << ")=" << o.denominator;
    }
    return os.str();
  }

  std::vector<OffendingComposition> offending_;
};

/// sigma + alpha_tilde - alpha_bar vanishes, so portfolio weights are undefined.
class DegenerateStockVolatility : public std::domain_error {
 public:
  explicit DegenerateStockVolatility(double vol, std::optional<std::size_t> grid_index = {})
      : std::domain_error(describe(vol, grid_index)), vol_(vol), grid_index_(grid_index) {}

  double volatility() const noexcept { return vol_; }
  std::optional<std::size_t> grid_index() const noexcept { return grid_index_; }

 private:
  static std::string describe(double vol, std::optional<std::size_t> idx) {
    std::ostringstream os;
    os << "degenerate stock volatility " << vol;
    if (idx) os << " at grid index " << *idx;
    return os.str();
  }

  double vol_;
  std::optional<std::size_t> grid_index_;
};

/// The analytic tail beyond the simulation horizon is too large relative to the price.
class TruncationTooLoose : public std::runtime_error {
 public:
  TruncationTooLoose(double bound, double closed_form)
      : std::runtime_error("truncation bound " + std::to_string(bound) +
                           " exceeds 10% of closed form " + std::to_string(closed_form) +
                           "; raise the horizon"),
        bound_(bound),
        closed_form_(closed_form) {}

  double bound() const noexcept { return bound_; }
  double closed_form() const noexcept { return closed_form_; }

 private:
  double bound_;
  double closed_form_;
};

class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(int iterations, double residual)
      : std::runtime_error("calibration did not converge after " + std::to_string(iterations) +
                           " iterations (residual " + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// A calibration iterate left the validated region and step halving could not recover it.
class ValidationLost : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hbeliefs
