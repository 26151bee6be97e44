#pragma once

// Tail-to-window ratios of positive sequences and the bounds that justify the
// lookback test: geometric, ratio-nonincreasing, and power-then-geometric sequences.

#include <cmath>
#include <limits>
#include <optional>

#include "slq/core.hpp"

namespace slq {

/// sum_{i=mp}^{n-1} a_i / sum_{i=m}^{mp-1} a_i for a finite sequence a_1..a_{n-1}
/// stored 0-based in `a` (so n - 1 = a.size()).
inline double tail_to_window_ratio(std::span<const double> a, std::size_t m, std::size_t mp) {
  require(m >= 1 && m < mp && mp <= a.size(), "tail_to_window_ratio: need 1 <= m < m' <= n-1");
  CompensatedSum window, tail;
  for (std::size_t i = m; i < mp; ++i) window.add(a[i - 1]);
  for (std::size_t i = mp; i <= a.size(); ++i) tail.add(a[i - 1]);
  return tail.value() / window.value();
}

/// Bound for geometric and ratio-nonincreasing sequences: t/(1-t) when the tail is longer
/// than the window (n - m' > m' - m), t otherwise. `n` empty means an infinite sequence.
inline double lookback_ratio_bound(double t, std::size_t m, std::size_t mp, std::optional<std::size_t> n) {
  require(t > 0.0 && t < 1.0 && m < mp, "lookback_ratio_bound: invalid arguments");
  if (!n || *n - mp > mp - m) return t / (1.0 - t);
  return t;
}

/// Exact ratio for a_i = c^i (infinite when n is empty).
inline double geometric_tail_ratio(double c, std::size_t m, std::size_t mp, std::optional<std::size_t> n) {
  require(c > 0.0 && c < 1.0 && m < mp, "geometric_tail_ratio: invalid arguments");
  const double w = std::pow(c, static_cast<double>(mp - m));
  const double tail = n ? w - std::pow(c, static_cast<double>(*n - m)) : w;
  return tail / (1.0 - w);
}

/// The sequence 1/i^{p+1} for i < s, continued geometrically from 1/s^{p+1} with
/// ratio c = ((s-1)/s)^{p+1}.
struct PowerGeometricSequence {
  double p;
  std::size_t s;
  std::optional<std::size_t> n;  // last index is n - 1; empty for infinite

  double ratio() const { return std::pow((static_cast<double>(s) - 1.0) / static_cast<double>(s), p + 1.0); }

  double operator()(std::size_t i) const {
    if (i < s) return std::pow(static_cast<double>(i), -(p + 1.0));
    return std::pow(ratio(), static_cast<double>(i - s)) * std::pow(static_cast<double>(s), -(p + 1.0));
  }

  /// sum_{i=mp}^{n-1} a_i / sum_{i=m}^{mp-1} a_i with the geometric part summed in closed form.
  double tail_to_window_ratio(std::size_t m, std::size_t mp) const {
    require(m >= 1 && m < mp && mp < s, "PowerGeometricSequence: need 1 <= m < m' < s");
    CompensatedSum window, tail;
    for (std::size_t i = m; i < mp; ++i) window.add((*this)(i));
    for (std::size_t i = mp; i < s; ++i) tail.add((*this)(i));
    const double c = ratio();
    const double len = n ? static_cast<double>(*n - s) : std::numeric_limits<double>::infinity();
    const double geo = (1.0 - (std::isinf(len) ? 0.0 : std::pow(c, len))) / (1.0 - c);
    tail.add(std::pow(static_cast<double>(s), -(p + 1.0)) * geo);
    return tail.value() / window.value();
  }
};

/// Rigorous bound for power-then-geometric sequences with a_{m'}/a_m <= t.
inline double power_geometric_bound(std::size_t mp, std::size_t s, double p, double t) {
  const double r = static_cast<double>(mp) / static_cast<double>(s);
  const double sd = static_cast<double>(s);
  const double num = 1.0 + p / static_cast<double>(mp) -
                     std::pow(r, p) * (1.0 + p / sd - p / (p + 1.0) / (1.0 - p / (2.0 * sd)));
  return num / (std::pow(t, -p / (p + 1.0)) - 1.0);
}

/// The simplified form of the bound above when p is small relative to m' and s.
inline double power_geometric_bound_approx(double mp_over_s, double p, double t) {
  return (1.0 - std::pow(mp_over_s, p) / (p + 1.0)) / (std::pow(t, -p / (p + 1.0)) - 1.0);
}

}  // namespace slq
