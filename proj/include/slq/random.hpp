#pragma once

// Counter-based random streams. Every draw is a pure function of (key, counter),
// so results do not depend on platform, thread scheduling, or library version.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "slq/core.hpp"

namespace slq {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key of the i-th independent stream derived from a master seed.
constexpr std::uint64_t stream_key(std::uint64_t master, std::uint64_t i) noexcept {
  return mix64(mix64(master) ^ mix64(i + 0x632be59bd9b4e019ULL));
}

class CounterRng {
public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t next() noexcept { return mix64(key_ ^ mix64(counter_++)); }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Unbiased integer in [0, bound) by modulo rejection.
  std::uint64_t below(std::uint64_t bound) {
    require(bound > 0, "CounterRng::below: empty range");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t r = next();
    while (r >= limit) r = next();
    return r % bound;
  }

  /// Standard normal variate (Box-Muller, one value per call).
  double normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Vector of iid +-1 entries; 64 entries are drawn from each counter value.
inline Vector rademacher_vector(std::size_t n, std::uint64_t key) {
  require(n >= 1, "rademacher_vector: n must be positive");
  Vector u(n);
  CounterRng rng(key);
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 64 == 0) bits = rng.next();
    u[i] = (bits & 1u) ? 1.0 : -1.0;
    bits >>= 1;
  }
  return u;
}

/// `count` distinct indices from [0, population), uniform without replacement,
/// returned in ascending order. Partial Fisher-Yates on a counter stream.
inline std::vector<std::size_t> sample_without_replacement(std::size_t population,
                                                           std::size_t count,
                                                           std::uint64_t seed) {
  require(count <= population, "sample_without_replacement: count exceeds population");
  std::vector<std::size_t> idx(population);
  for (std::size_t i = 0; i < population; ++i) idx[i] = i;
  CounterRng rng(stream_key(seed, 0x5173));
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(population - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace slq
