#pragma once

// Energy detector for the complementary-sequence scheme and the power
// modulation baseline with random unimodular sequences.

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "csoac/cs_core.hpp"
#include "csoac/rng.hpp"

namespace csoac {

struct MetricPair {
  double plus = 0.0;
  double minus = 0.0;
  std::size_t n = 0;
};

/// M+_n sums |r_i|^2 over x~_{pi(n)} = 1, M-_n over x~_{pi(n)} = 0.
inline MetricPair metrics(std::span<const cplx> r, std::size_t n, const SequenceLayout& layout) {
  if (r.size() != layout.length()) throw std::invalid_argument("metrics: received vector must have length 2^m");
  if (n >= layout.m()) throw std::invalid_argument("metrics: MV index out of range");
  MetricPair mp{0.0, 0.0, n};
  for (std::size_t i = 0; i < r.size(); ++i) {
    (layout.in_plus_half(i, n) ? mp.plus : mp.minus) += std::norm(r[i]);
  }
  return mp;
}

inline MetricPair metrics(std::span<const cplx> r, std::size_t n, const Permutation& pi) {
  return metrics(r, n, SequenceLayout(pi));
}

enum class TieMode { error, random, zero };

class TieError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// sign(M+ - M-). Exact ties follow `mode`; `rng` is only touched for random ties.
inline int decide(const MetricPair& mp, TieMode mode = TieMode::random, Rng* rng = nullptr) {
  if (mp.plus > mp.minus) return 1;
  if (mp.plus < mp.minus) return -1;
  switch (mode) {
    case TieMode::zero: return 0;
    case TieMode::error: throw TieError("decide: M+ equals M- for MV " + std::to_string(mp.n));
    case TieMode::random:
      if (rng == nullptr) throw std::invalid_argument("decide: random tie-break needs an rng");
      return std::bernoulli_distribution(0.5)(*rng) ? 1 : -1;
  }
  return 0;
}

inline std::vector<int> decide_all(std::span<const cplx> r, const SequenceLayout& layout, TieMode mode, Rng* rng) {
  std::vector<int> d(layout.m());
  for (std::size_t n = 0; n < layout.m(); ++n) d[n] = decide(metrics(r, n, layout), mode, rng);
  return d;
}

// ---------------------------------------------------------------------------
// Baseline: votes -1/0/+1 become symbols 0/1/2 that set the power of a random
// unimodular sequence; the receiver estimates sum(votes) from the energy.

/// How the symbol s sets the element amplitude. `power` (sqrt(s)) keeps the
/// receiver statistic ||r||^2 / L - K unbiased; `square` (s^2) is the literal
/// reading of the scheme description and is kept for comparison.
enum class BaselineAmplitude { power, square };

inline int baseline_symbol(Vote v) noexcept { return to_int(v) + 1; }

inline double baseline_amplitude(Vote v, BaselineAmplitude mode) {
  const double s = baseline_symbol(v);
  return mode == BaselineAmplitude::power ? std::sqrt(s) : s * s;
}

/// Amplitude-scaled sequence of L unit-modulus elements with i.i.d. phases on [0, 2pi).
inline CVec goldenbaum_encode(Vote v, std::size_t L, Rng& rng, BaselineAmplitude mode = BaselineAmplitude::power) {
  if (L < 1) throw std::invalid_argument("goldenbaum_encode: L must be >= 1");
  const double a = baseline_amplitude(v, mode);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  CVec out(L);
  for (auto& z : out) z = std::polar(a, phase(rng));
  return out;
}

struct BaselineDecision {
  double estimate = 0.0;  ///< ||r||^2 / L - K.
  int sign = 0;
};

/// No noise-variance correction is applied.
inline BaselineDecision goldenbaum_decode(std::span<const cplx> r, std::size_t K) {
  if (r.empty()) throw std::invalid_argument("goldenbaum_decode: L must be >= 1");
  double e = 0.0;
  for (const auto& z : r) e += std::norm(z);
  const double est = e / static_cast<double>(r.size()) - static_cast<double>(K);
  return {est, est > 0.0 ? 1 : (est < 0.0 ? -1 : 0)};
}

struct BaselineLayout {
  std::size_t m = 0;
  std::size_t block_length = 0;  ///< L = round(2^m / m).
  std::size_t subcarriers() const noexcept { return m * block_length; }
  std::size_t offset(std::size_t n) const noexcept { return n * block_length; }
};

/// m back-to-back blocks of L = round(2^m / m) subcarriers.
inline BaselineLayout goldenbaum_layout(std::size_t m) {
  if (m < 1 || m > kMaxM) throw std::invalid_argument("goldenbaum_layout: m out of range");
  const double L = std::round(std::ldexp(1.0, static_cast<int>(m)) / static_cast<double>(m));
  return {m, static_cast<std::size_t>(L)};
}

/// All m blocks of one sensor, concatenated.
inline CVec goldenbaum_transmit(std::span<const Vote> votes, const BaselineLayout& layout, Rng& rng,
                                BaselineAmplitude mode = BaselineAmplitude::power) {
  if (votes.size() != layout.m) throw std::invalid_argument("goldenbaum_transmit: vote vector length differs from m");
  CVec out;
  out.reserve(layout.subcarriers());
  for (Vote v : votes) {
    const CVec block = goldenbaum_encode(v, layout.block_length, rng, mode);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

}  // namespace csoac
