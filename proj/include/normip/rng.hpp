#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <algorithm>
#include <random>
#include <span>

namespace normip {

/// Engine used everywhere. Its output sequence is fixed by the standard, so
/// every derived quantity below is reproducible across toolchains.
using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Substream seed for (master, cell, trial):
///   mix64(mix64(mix64(master) ^ cell) ^ trial)
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t trial) {
  return mix64(mix64(mix64(master) ^ cell) ^ trial);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Uniform double in [0, 1) from the top 53 bits. Used instead of
/// std::uniform_real_distribution, whose output is implementation-defined.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, bound) by rejection (unbiased, portable).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

/// Standard normal via Box-Muller on uniform01.
inline double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// Index i with probability (cdf[i] - cdf[i-1]) / cdf.back(), by inversion
/// and binary search. `cdf` must be nondecreasing with cdf.back() > 0.
inline std::size_t sample_from_cdf(std::span<const double> cdf, Rng& rng) {
  const double u = uniform01(rng) * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto i = static_cast<std::size_t>(it - cdf.begin());
  return i < cdf.size() ? i : cdf.size() - 1;
}

}  // namespace normip
