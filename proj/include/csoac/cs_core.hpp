#pragma once

// Complementary sequences from pseudo-Boolean functions and the vote encoder
// that modulates their amplitudes.
//
// A binary word x = (x_1, ..., x_m) is stored as the integer i(x) whose MSB is
// x_1. All indices in the C++ API are zero-based: MV index n runs over
// [0, m) and a Permutation maps a position n to a variable index in [0, m).

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "csoac/rng.hpp"

namespace csoac {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

/// Scaling parameter value selecting the symbolic xi -> infinity encoder.
inline constexpr double kXiInfinite = std::numeric_limits<double>::infinity();

/// Largest supported number of MVs per sequence (length 2^20).
inline constexpr std::size_t kMaxM = 20;

enum class Vote : std::int8_t { negative = -1, absent = 0, positive = 1 };

constexpr int to_int(Vote v) noexcept { return static_cast<int>(v); }

constexpr Vote vote_of_sign(double d) noexcept {
  return d > 0.0 ? Vote::positive : (d < 0.0 ? Vote::negative : Vote::absent);
}

inline Vote vote_from_int(int v) {
  if (v < -1 || v > 1) throw std::invalid_argument("vote must be -1, 0 or +1, got " + std::to_string(v));
  return static_cast<Vote>(v);
}

inline std::vector<Vote> make_votes(std::initializer_list<int> values) {
  std::vector<Vote> out;
  out.reserve(values.size());
  for (int v : values) out.push_back(vote_from_int(v));
  return out;
}

/// Per-entry vote law: P(+1) = alpha, P(-1) = beta, P(0) = gamma.
struct VoteDistribution {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 1.0;

  void validate() const {
    for (double p : {alpha, beta, gamma}) {
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("vote probabilities must lie in [0, 1]");
    }
    if (std::abs(alpha + beta + gamma - 1.0) > 1e-12) {
      throw std::invalid_argument("vote probabilities must sum to 1");
    }
  }

  Vote draw(Rng& rng) const {
    const double u = uniform01(rng);
    if (u < alpha) return Vote::positive;
    if (u < alpha + beta) return Vote::negative;
    return Vote::absent;
  }
};

struct VoteCounts {
  int plus = 0;
  int minus = 0;
  int zero = 0;

  int total() const noexcept { return plus + minus + zero; }
  void validate() const {
    if (plus < 0 || minus < 0 || zero < 0) throw std::invalid_argument("vote counts must be nonnegative");
  }
};

/// Votes of K sensors on m MVs, one row per sensor.
class VoteMatrix {
 public:
  VoteMatrix(std::size_t sensors, std::size_t m, Vote fill = Vote::absent)
      : sensors_(sensors), m_(m), data_(sensors * m, fill) {}

  std::size_t sensors() const noexcept { return sensors_; }
  std::size_t m() const noexcept { return m_; }

  Vote operator()(std::size_t k, std::size_t n) const { return data_[k * m_ + n]; }
  Vote& operator()(std::size_t k, std::size_t n) { return data_[k * m_ + n]; }

  std::span<const Vote> row(std::size_t k) const { return {data_.data() + k * m_, m_}; }
  std::span<Vote> row(std::size_t k) { return {data_.data() + k * m_, m_}; }

  VoteCounts counts(std::size_t n) const {
    VoteCounts c;
    for (std::size_t k = 0; k < sensors_; ++k) {
      switch ((*this)(k, n)) {
        case Vote::positive: ++c.plus; break;
        case Vote::negative: ++c.minus; break;
        case Vote::absent: ++c.zero; break;
      }
    }
    return c;
  }

  /// sign of the column sum, the MV under perfect communication.
  int ideal_mv(std::size_t n) const {
    const auto c = counts(n);
    return c.plus > c.minus ? 1 : (c.plus < c.minus ? -1 : 0);
  }

  static VoteMatrix random(std::size_t sensors, std::size_t m, const VoteDistribution& dist, Rng& rng) {
    VoteMatrix v(sensors, m);
    for (auto& x : v.data_) x = dist.draw(rng);
    return v;
  }

 private:
  std::size_t sensors_;
  std::size_t m_;
  std::vector<Vote> data_;
};

/// Decimal value of x with x[0] as the most significant bit.
inline std::size_t index_of(std::span<const std::uint8_t> x, std::size_t m) {
  if (x.size() != m) {
    throw std::invalid_argument("index_of: expected " + std::to_string(m) + " bits, got " +
                                std::to_string(x.size()));
  }
  std::size_t i = 0;
  for (std::uint8_t b : x) {
    if (b > 1) throw std::invalid_argument("index_of: entries must be 0 or 1");
    i = (i << 1) | b;
  }
  return i;
}

inline std::vector<std::uint8_t> bits_of(std::size_t i, std::size_t m) {
  std::vector<std::uint8_t> x(m);
  for (std::size_t j = 0; j < m; ++j) x[j] = static_cast<std::uint8_t>((i >> (m - 1 - j)) & 1U);
  return x;
}

class Permutation {
 public:
  explicit Permutation(std::vector<int> zero_based) : map_(std::move(zero_based)) {
    const std::size_t m = map_.size();
    if (m == 0 || m > kMaxM) throw std::invalid_argument("permutation size must be in [1, 20]");
    std::vector<bool> seen(m, false);
    for (int v : map_) {
      if (v < 0 || static_cast<std::size_t>(v) >= m || seen[static_cast<std::size_t>(v)]) {
        throw std::invalid_argument("not a permutation of {0..m-1}");
      }
      seen[static_cast<std::size_t>(v)] = true;
    }
  }

  /// From the conventional 1-based listing, e.g. (3, 2, 1).
  static Permutation from_one_based(std::vector<int> one_based) {
    for (int& v : one_based) --v;
    return Permutation(std::move(one_based));
  }

  static Permutation identity(std::size_t m) {
    std::vector<int> p(m);
    for (std::size_t n = 0; n < m; ++n) p[n] = static_cast<int>(n);
    return Permutation(std::move(p));
  }

  /// (m, m-1, ..., 1), the ordering used for the m = 3 worked example.
  static Permutation reversed(std::size_t m) {
    std::vector<int> p(m);
    for (std::size_t n = 0; n < m; ++n) p[n] = static_cast<int>(m - 1 - n);
    return Permutation(std::move(p));
  }

  std::size_t size() const noexcept { return map_.size(); }
  int operator[](std::size_t n) const { return map_.at(n); }
  const std::vector<int>& values() const noexcept { return map_; }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> map_;
};

/// x~_{pi(n)}: (x_{pi(n)} + x_{pi(n+1)}) mod 2 for n < m-1, x_{pi(m-1)} for the last position.
inline unsigned tilde_monomial(std::span<const std::uint8_t> x, const Permutation& pi, std::size_t n) {
  const std::size_t m = pi.size();
  if (x.size() != m) throw std::invalid_argument("tilde_monomial: bit-vector length differs from permutation size");
  if (n >= m) throw std::invalid_argument("tilde_monomial: position out of range");
  const unsigned a = x[static_cast<std::size_t>(pi[n])] & 1U;
  if (n + 1 == m) return a;
  return a ^ (x[static_cast<std::size_t>(pi[n + 1])] & 1U);
}

/// Per-index tables for a fixed (m, pi). Shared by the encoder, the detector
/// and the rate-profile computation; immutable after construction.
class SequenceLayout {
 public:
  explicit SequenceLayout(Permutation pi) : pi_(std::move(pi)) {
    const std::size_t m = pi_.size();
    const std::size_t len = std::size_t{1} << m;
    gray_.resize(len);
    permuted_.resize(len);
    quad_parity_.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
      const auto x = bits_of(i, m);
      std::uint32_t g = 0, p = 0;
      unsigned q = 0;
      for (std::size_t n = 0; n < m; ++n) {
        g |= tilde_monomial(x, pi_, n) << n;
        p |= static_cast<std::uint32_t>(x[static_cast<std::size_t>(pi_[n])]) << n;
        if (n + 1 < m) q ^= x[static_cast<std::size_t>(pi_[n])] & x[static_cast<std::size_t>(pi_[n + 1])];
      }
      gray_[i] = g;
      permuted_[i] = p;
      quad_parity_[i] = static_cast<std::uint8_t>(q);
    }
  }

  explicit SequenceLayout(std::size_t m) : SequenceLayout(Permutation::reversed(m)) {}

  std::size_t m() const noexcept { return pi_.size(); }
  std::size_t length() const noexcept { return gray_.size(); }
  const Permutation& permutation() const noexcept { return pi_; }

  /// Bit n holds x~_{pi(n)} for the word with index i.
  std::uint32_t gray(std::size_t i) const { return gray_[i]; }
  /// Bit n holds x_{pi(n)}.
  std::uint32_t permuted_bits(std::size_t i) const { return permuted_[i]; }
  /// Parity of sum_n x_{pi(n)} x_{pi(n+1)}.
  unsigned quadratic_parity(std::size_t i) const { return quad_parity_[i]; }
  /// True when element i lands in the M+ half of MV n.
  bool in_plus_half(std::size_t i, std::size_t n) const { return (gray_[i] >> n) & 1U; }

 private:
  Permutation pi_;
  std::vector<std::uint32_t> gray_;
  std::vector<std::uint32_t> permuted_;
  std::vector<std::uint8_t> quad_parity_;
};

/// Free coefficients of a sequence in the family: phase terms e_0..e_m in Z_H
/// and amplitude terms c_0..c_m in nats. Index 0 holds the constant term.
struct CsParams {
  int modulus = 2;
  std::vector<int> phase;
  std::vector<double> amplitude;

  void validate(std::size_t m) const {
    if (modulus < 1) throw std::invalid_argument("phase modulus H must be positive");
    if (phase.size() != m + 1 || amplitude.size() != m + 1) {
      throw std::invalid_argument("CsParams needs m+1 phase and amplitude coefficients");
    }
    for (int e : phase) {
      if (e < 0 || e >= modulus) throw std::invalid_argument("phase coefficient outside Z_H");
    }
  }
};

struct EncodedSequence {
  CVec elements;
  /// Scaling parameter used by the vote encoder; empty for raw generation.
  std::optional<double> xi;

  double norm_squared() const {
    double s = 0.0;
    for (const auto& z : elements) s += std::norm(z);
    return s;
  }
};

namespace detail {

// exp(j*pi*k/H) with the four axis points returned exactly.
inline cplx unit_phase(long long twice_phase, int modulus) {
  const long long period = 2LL * modulus;
  long long k = twice_phase % period;
  if (k < 0) k += period;
  if (k == 0) return {1.0, 0.0};
  if (2 * k == period) return {-1.0, 0.0};
  if (4 * k == period) return {0.0, 1.0};
  if (4 * k == 3 * period) return {0.0, -1.0};
  return std::polar(1.0, std::numbers::pi * static_cast<double>(k) / modulus);
}

// Twice the phase function f_i, reduced later modulo 2H.
inline long long twice_phase_index(const SequenceLayout& layout, std::size_t i, int modulus,
                                   std::span<const int> phase) {
  long long v = static_cast<long long>(modulus) * layout.quadratic_parity(i) + 2LL * phase[0];
  const std::uint32_t p = layout.permuted_bits(i);
  for (std::size_t n = 0; n < layout.m(); ++n) {
    if ((p >> n) & 1U) v += 2LL * phase[n + 1];
  }
  return v;
}

inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline void check_votes(std::span<const Vote> votes, std::size_t m) {
  if (votes.size() != m) throw std::invalid_argument("vote vector length differs from m");
}

}  // namespace detail

/// Element i is exp(f_r(x)) * exp(j*2*pi/H * f_i(x)), x = bits_of(i).
inline EncodedSequence generate_cs(const SequenceLayout& layout, const CsParams& params) {
  const std::size_t m = layout.m();
  params.validate(m);
  EncodedSequence out;
  out.elements.resize(layout.length());
  for (std::size_t i = 0; i < layout.length(); ++i) {
    double fr = params.amplitude[0];
    const std::uint32_t g = layout.gray(i);
    for (std::size_t n = 0; n < m; ++n) {
      if ((g >> n) & 1U) fr += params.amplitude[n + 1];
    }
    const cplx ph = detail::unit_phase(detail::twice_phase_index(layout, i, params.modulus, params.phase),
                                       params.modulus);
    out.elements[i] = std::exp(fr) * ph;
  }
  return out;
}

/// c_0 that restores ||t||^2 = 2^m given c_1..c_m.
inline double normalization_coefficient(std::span<const double> amp) {
  double s = 0.0;
  for (double c : amp) s += detail::softplus(2.0 * c) - std::numbers::ln2;
  return -0.5 * s;
}

/// Vote encoder with explicit phase coefficients e_0..e_m. xi must be > 0;
/// kXiInfinite selects the masking limit, where each nonzero vote zeroes one
/// half of the sequence and scales the other by sqrt(2).
inline EncodedSequence encode_votes_with_phases(const SequenceLayout& layout, std::span<const Vote> votes, double xi,
                                                int modulus, std::span<const int> phase) {
  const std::size_t m = layout.m();
  detail::check_votes(votes, m);
  if (!(xi > 0.0)) throw std::invalid_argument("encode_votes: xi must be positive");
  if (modulus < 1) throw std::invalid_argument("phase modulus H must be positive");
  if (phase.size() != m + 1) throw std::invalid_argument("encode_votes: need m+1 phase coefficients");

  if (std::isinf(xi)) {
    std::uint32_t mask = 0, target = 0;
    for (std::size_t n = 0; n < m; ++n) {
      if (votes[n] != Vote::absent) mask |= 1U << n;
      if (votes[n] == Vote::positive) target |= 1U << n;
    }
    const double scale = std::pow(2.0, 0.5 * std::popcount(mask));
    EncodedSequence out{CVec(layout.length()), xi};
    for (std::size_t i = 0; i < layout.length(); ++i) {
      if ((layout.gray(i) & mask) != target) continue;
      out.elements[i] = scale * detail::unit_phase(detail::twice_phase_index(layout, i, modulus, phase), modulus);
    }
    return out;
  }

  CsParams params{modulus, std::vector<int>(phase.begin(), phase.end()), std::vector<double>(m + 1, 0.0)};
  for (std::size_t n = 0; n < m; ++n) params.amplitude[n + 1] = xi * to_int(votes[n]);
  params.amplitude[0] = normalization_coefficient(std::span<const double>(params.amplitude).subspan(1));
  auto out = generate_cs(layout, params);
  out.xi = xi;
  return out;
}

inline std::vector<int> draw_phase_coefficients(std::size_t m, int modulus, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, modulus - 1);
  std::vector<int> e(m + 1);
  for (auto& v : e) v = pick(rng);
  return e;
}

/// Vote encoder with e_0..e_m drawn uniformly from Z_H.
inline EncodedSequence encode_votes(const SequenceLayout& layout, std::span<const Vote> votes, double xi, int modulus,
                                    Rng& rng) {
  if (modulus < 1) throw std::invalid_argument("phase modulus H must be positive");
  const auto e = draw_phase_coefficients(layout.m(), modulus, rng);
  return encode_votes_with_phases(layout, votes, xi, modulus, e);
}

/// Aperiodic autocorrelation at lags -(L-1)..(L-1).
struct Aacf {
  std::vector<cplx> values;

  std::ptrdiff_t length() const noexcept { return static_cast<std::ptrdiff_t>(values.size() + 1) / 2; }
  cplx operator()(std::ptrdiff_t k) const {
    const std::ptrdiff_t L = length();
    if (k <= -L || k >= L) return {0.0, 0.0};
    return values[static_cast<std::size_t>(k + L - 1)];
  }
};

inline Aacf aacf(std::span<const cplx> a) {
  if (a.empty()) throw std::invalid_argument("aacf: empty sequence");
  const auto L = static_cast<std::ptrdiff_t>(a.size());
  Aacf out{std::vector<cplx>(static_cast<std::size_t>(2 * L - 1))};
  for (std::ptrdiff_t k = 0; k < L; ++k) {
    cplx s{0.0, 0.0};
    for (std::ptrdiff_t i = 0; i + k < L; ++i) s += std::conj(a[static_cast<std::size_t>(i)]) * a[static_cast<std::size_t>(i + k)];
    out.values[static_cast<std::size_t>(k + L - 1)] = s;
    out.values[static_cast<std::size_t>(L - 1 - k)] = std::conj(s);
  }
  return out;
}

}  // namespace csoac
