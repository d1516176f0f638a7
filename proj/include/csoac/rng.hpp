#pragma once

#include <complex>
#include <cmath>
#include <cstdint>
#include <random>

namespace csoac {

using Rng = std::mt19937_64;

/// One step of the splitmix64 sequence. Used for every seed derivation in the
/// project so that a (seed, index) pair always maps to the same stream.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of stream `index` under `base`. Streams are keyed by trial (or run)
/// index, never by worker or shard, so the set of streams consumed by an
/// experiment does not depend on how it is split across threads.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

inline Rng make_rng(std::uint64_t base, std::uint64_t index) {
  return Rng{derive_seed(base, index)};
}

/// Draws from CN(0, variance).
inline std::complex<double> complex_normal(Rng& rng, double variance) {
  if (variance <= 0.0) return {0.0, 0.0};
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5 * variance));
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace csoac
