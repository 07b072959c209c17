#pragma once

// Compositions of an integer K into J nonnegative parts, and their
// multinomial coefficients. Every beta-sum in the equilibrium formulas runs
// over one of these lists.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hbeliefs/errors.hpp"

namespace hbeliefs {

inline constexpr std::size_t kDefaultCompositionCap = 10'000'000;

struct MultiIndex {
  std::vector<int> parts;
  int order = 0;

  std::size_t size() const noexcept { return parts.size(); }
  bool operator==(const MultiIndex&) const = default;
};

/// C(K+J-1, J-1), saturating at SIZE_MAX.
inline std::size_t composition_count(int J, int K) {
  if (J < 1 || K < 0) throw std::invalid_argument("composition_count: need J >= 1, K >= 0");
  // C(K+J-1, k) built up incrementally; every partial product is itself a binomial.
  unsigned __int128 c = 1;
  const auto cap = static_cast<unsigned __int128>(std::numeric_limits<std::size_t>::max());
  for (int i = 1; i <= J - 1; ++i) {
    c = c * static_cast<unsigned>(K + i) / static_cast<unsigned>(i);
    if (c > cap) return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(c);
}

/// All compositions of K into J parts, lexicographically descending:
/// (K,0,...,0) first, (0,...,0,K) last.
inline std::vector<MultiIndex> enumerate_compositions(int J, int K,
                                                      std::size_t cap = kDefaultCompositionCap) {
  if (J < 1 || K < 0) throw std::invalid_argument("enumerate_compositions: need J >= 1, K >= 0");
  const std::size_t count = composition_count(J, K);
  if (count > cap) throw CompositionLimitExceeded(count, cap);

  std::vector<MultiIndex> out;
  out.reserve(count);
  std::vector<int> a(static_cast<std::size_t>(J), 0);
  a[0] = K;
  for (;;) {
    out.push_back(MultiIndex{a, K});
    // rightmost nonzero part that is not the last one
    int i = J - 2;
    while (i >= 0 && a[static_cast<std::size_t>(i)] == 0) --i;
    if (i < 0) break;
    int tail = 0;
    for (int k = i + 1; k < J; ++k) {
      tail += a[static_cast<std::size_t>(k)];
      a[static_cast<std::size_t>(k)] = 0;
    }
    --a[static_cast<std::size_t>(i)];
    a[static_cast<std::size_t>(i + 1)] = tail + 1;
  }
  return out;
}

/// log(K! / (beta_1! ... beta_J!)) via log-gamma.
inline double log_multinomial_coefficient(const MultiIndex& beta) {
  double s = std::lgamma(static_cast<double>(beta.order) + 1.0);
  for (int b : beta.parts) s -= std::lgamma(static_cast<double>(b) + 1.0);
  // rounding can leave a tiny negative residue when the coefficient is 1
  return s < 0.0 ? 0.0 : s;
}

/// Exact multinomial coefficient; K <= 20 so that K! fits in 64 bits.
inline std::uint64_t multinomial_coefficient(const MultiIndex& beta) {
  if (beta.order > 20) throw std::domain_error("multinomial_coefficient: exact path needs K <= 20");
  auto factorial = [](int n) {
    std::uint64_t f = 1;
    for (int k = 2; k <= n; ++k) f *= static_cast<std::uint64_t>(k);
    return f;
  };
  std::uint64_t c = factorial(beta.order);
  for (int b : beta.parts) c /= factorial(b);
  return c;
}

/// beta + e_j
inline MultiIndex add_unit(const MultiIndex& beta, std::size_t j) {
  MultiIndex out = beta;
  ++out.parts.at(j);
  ++out.order;
  return out;
}

}  // namespace hbeliefs
