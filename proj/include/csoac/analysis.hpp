#pragma once

// Performance theory for the complementary-sequence MV detector.
//
// Under i.i.d. CN(0,1) per-subcarrier fading, |r_i|^2 given the votes is
// exponential with mean sum_k |t_k,i|^2 + noise_var, independently across i.
// M+ - M- is then a difference of two sums of exponentials whose CDF is
// recovered from its characteristic function by Gil-Pelaez inversion:
//
//   F(x) = 1/2 - (1/pi) * int_0^inf Im[phi(t) exp(-j t x)] / t dt
//
// At an atom of the distribution the inversion returns the midpoint
// (F(x) + F(x-)) / 2, which is also the error probability of a fair coin
// tie-break, so it is used unchanged for the CER.

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "csoac/cs_core.hpp"
#include "csoac/parallel.hpp"
#include "csoac/rng.hpp"

namespace csoac {

class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double error_estimate)
      : std::runtime_error(what + " (error estimate " + std::to_string(error_estimate) + ")"),
        error_estimate_(error_estimate) {}
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// --- expected metrics ------------------------------------------------------

struct ExpectedMetrics {
  double plus = 0.0;
  double minus = 0.0;
};

/// Closed-form E[M+_n], E[M-_n] over channel and noise. xi = kXiInfinite
/// gives the masking limit 2^m K+ + 2^(m-1) (K0 + noise_var).
inline ExpectedMetrics expected_metrics(const VoteCounts& counts, double xi, std::size_t m, double noise_var) {
  counts.validate();
  if (!(xi >= 0.0)) throw std::invalid_argument("expected_metrics: xi must be >= 0");
  const double L = std::ldexp(1.0, static_cast<int>(m));
  const double shared = 0.5 * L * (counts.zero + noise_var);
  // Fraction of a positive voter's energy landing in the M+ half.
  const double a = std::isinf(xi) ? 1.0 : 1.0 / (1.0 + std::exp(-2.0 * xi));
  return {L * (a * counts.plus + (1.0 - a) * counts.minus) + shared,
          L * ((1.0 - a) * counts.plus + a * counts.minus) + shared};
}

// --- rate profile ----------------------------------------------------------

/// Per-element exponential means: sum_k exp(2 f_r,k(x)) + noise_var.
struct RateProfile {
  std::vector<double> means;
};

/// |t_i|^2 for one sensor's encoded sequence, without drawing phases.
inline std::vector<double> element_powers(const SequenceLayout& layout, std::span<const Vote> votes, double xi) {
  const std::size_t m = layout.m();
  if (votes.size() != m) throw std::invalid_argument("element_powers: vote vector length differs from m");
  if (!(xi > 0.0)) throw std::invalid_argument("element_powers: xi must be positive");
  std::vector<double> p(layout.length(), 0.0);
  if (std::isinf(xi)) {
    std::uint32_t mask = 0, target = 0;
    for (std::size_t n = 0; n < m; ++n) {
      if (votes[n] != Vote::absent) mask |= 1U << n;
      if (votes[n] == Vote::positive) target |= 1U << n;
    }
    const double level = std::ldexp(1.0, std::popcount(mask));
    for (std::size_t i = 0; i < p.size(); ++i) {
      if ((layout.gray(i) & mask) == target) p[i] = level;
    }
    return p;
  }
  std::vector<double> c(m);
  for (std::size_t n = 0; n < m; ++n) c[n] = xi * to_int(votes[n]);
  const double c0 = normalization_coefficient(c);
  for (std::size_t i = 0; i < p.size(); ++i) {
    double fr = c0;
    for (std::size_t n = 0; n < m; ++n) {
      if (layout.in_plus_half(i, n)) fr += c[n];
    }
    p[i] = std::exp(2.0 * fr);
  }
  return p;
}

inline RateProfile rate_profile(const VoteMatrix& votes, double xi, const SequenceLayout& layout, double noise_var) {
  if (votes.m() != layout.m()) throw std::invalid_argument("rate_profile: vote matrix has wrong number of MVs");
  if (!(noise_var >= 0.0)) throw std::invalid_argument("rate_profile: noise variance must be >= 0");
  RateProfile out{std::vector<double>(layout.length(), noise_var)};
  for (std::size_t k = 0; k < votes.sensors(); ++k) {
    const auto p = element_powers(layout, votes.row(k), xi);
    for (std::size_t i = 0; i < p.size(); ++i) out.means[i] += p[i];
  }
  return out;
}

// --- characteristic-function inversion -------------------------------------

/// Distinct nonzero exponential means on each half with multiplicities.
struct HalfRates {
  std::vector<std::pair<double, int>> plus;
  std::vector<std::pair<double, int>> minus;
};

namespace detail {

inline std::vector<std::pair<double, int>> compress(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<std::pair<double, int>> out;
  for (double x : v) {
    if (!(x > 0.0)) continue;
    if (!out.empty() && out.back().first == x) ++out.back().second;
    else out.emplace_back(x, 1);
  }
  return out;
}

}  // namespace detail

inline HalfRates split_rates(const RateProfile& profile, std::size_t n, const SequenceLayout& layout) {
  if (profile.means.size() != layout.length()) throw std::invalid_argument("split_rates: profile length mismatch");
  if (n >= layout.m()) throw std::invalid_argument("split_rates: MV index out of range");
  std::vector<double> p, q;
  p.reserve(profile.means.size() / 2);
  q.reserve(profile.means.size() / 2);
  for (std::size_t i = 0; i < profile.means.size(); ++i) {
    (layout.in_plus_half(i, n) ? p : q).push_back(profile.means[i]);
  }
  return {detail::compress(std::move(p)), detail::compress(std::move(q))};
}

struct InversionOptions {
  /// Relative tolerance handed to the adaptive Gauss-Kronrod rule.
  double rel_tol = 1e-10;
  /// Absolute error estimate on F above which the inversion fails.
  double fail_tol = 1e-6;
  /// |phi| below which the integrand tail is dropped.
  double tail_cutoff = 1e-12;
  unsigned max_depth = 25;
};

/// P(M+ - M- <= x) (midpoint at atoms) for independent exponential sums. The
/// integral is taken in s = t * sqrt(sum mu^2), which leaves dt/t unchanged.
inline double cdf_from_rates(const HalfRates& rates, double x, const InversionOptions& opts = {}) {
  if (rates.plus.empty() && rates.minus.empty()) return x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5);
  if (x == 0.0 && rates.plus == rates.minus) return 0.5;

  double sum_sq = 0.0, drift = -x;
  for (const auto& [mu, k] : rates.plus) {
    sum_sq += k * mu * mu;
    drift += k * mu;
  }
  for (const auto& [mu, k] : rates.minus) {
    sum_sq += k * mu * mu;
    drift -= k * mu;
  }
  const double scale = std::sqrt(sum_sq);
  const double xs = x / scale;

  auto log_magnitude = [&](double s) {
    double lm = 0.0;
    for (const auto& [mu, k] : rates.plus) lm -= 0.5 * k * std::log1p((mu * s / scale) * (mu * s / scale));
    for (const auto& [mu, k] : rates.minus) lm -= 0.5 * k * std::log1p((mu * s / scale) * (mu * s / scale));
    return lm;
  };
  auto integrand = [&](double s) -> double {
    if (s < 1e-300) return drift / scale;
    double theta = -xs * s;
    for (const auto& [mu, k] : rates.plus) theta += k * std::atan(mu * s / scale);
    for (const auto& [mu, k] : rates.minus) theta -= k * std::atan(mu * s / scale);
    if (s < 1e-8) return std::exp(log_magnitude(s)) * (theta / s);
    return std::exp(log_magnitude(s)) * std::sin(theta) / s;
  };

  const double log_cut = std::log(opts.tail_cutoff);
  double upper = 1.0;
  while (log_magnitude(upper) > log_cut && upper < 1e7) upper *= 2.0;

  using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;
  // Boost's adaptive rule only stops on error relative to the estimate, which
  // never happens when the two halves nearly cancel; add an absolute floor.
  const double abs_tol = 0.01 * opts.fail_tol;
  double err = 0.0;
  auto adapt = [&](auto&& self, auto&& f, double a, double b, double tol, unsigned depth) -> double {
    double e = 0.0;
    const double r = Quad::integrate(f, a, b, 0, 0.0, &e);
    if (depth == 0 || e <= std::max(tol, opts.rel_tol * std::abs(r))) {
      err += e;
      return r;
    }
    const double mid = 0.5 * (a + b);
    return self(self, f, a, mid, 0.5 * tol, depth - 1) + self(self, f, mid, b, 0.5 * tol, depth - 1);
  };
  double total = 0.0, lo = 0.0;
  // Integrate in blocks growing by 8x so the rule resolves the s ~ 1 structure.
  for (double hi = std::min(1.0, upper);; hi = std::min(hi * 8.0, upper)) {
    total += adapt(adapt, integrand, lo, hi, abs_tol, opts.max_depth);
    lo = hi;
    if (hi >= upper) break;
  }
  if (log_magnitude(upper) > log_cut) {
    // Slowly decaying tail: s = upper / u maps [upper, inf) onto (0, 1].
    auto tail = [&](double u) { return u < 1e-300 ? 0.0 : integrand(upper / u) * upper / (u * u); };
    total += adapt(adapt, tail, 0.0, 1.0, abs_tol, opts.max_depth);
  }
  err /= std::numbers::pi;
  if (!std::isfinite(total) || err > opts.fail_tol) {
    throw NumericalFailure("cdf inversion did not converge", err);
  }
  return std::clamp(0.5 - total / std::numbers::pi, 0.0, 1.0);
}

/// CDF of M+_n - M-_n at x for the given rate profile.
inline double cdf_metric_diff(const RateProfile& profile, std::size_t n, double x, const SequenceLayout& layout,
                              const InversionOptions& opts = {}) {
  return cdf_from_rates(split_rates(profile, n, layout), x, opts);
}

// --- CER -------------------------------------------------------------------

/// Error probability of MV n for a fixed vote matrix. Even splits always count as errors.
inline double cer_given_votes(const VoteMatrix& votes, std::size_t n, double xi, const SequenceLayout& layout,
                              double noise_var, const InversionOptions& opts = {}) {
  if (n >= votes.m()) throw std::invalid_argument("cer_given_votes: MV index out of range");
  const auto c = votes.counts(n);
  if (c.plus == c.minus) return 1.0;
  const double f0 = cdf_metric_diff(rate_profile(votes, xi, layout, noise_var), n, 0.0, layout, opts);
  return c.plus > c.minus ? f0 : 1.0 - f0;
}

enum class SamplingMode { automatic, exhaustive, monte_carlo };

struct Sampling {
  SamplingMode mode = SamplingMode::automatic;
  /// Realizations of the other columns in Monte Carlo mode.
  std::size_t trials = 1000;
  /// Largest enumerated state space, 3^8 by default; each state costs one inversion.
  std::size_t exhaustive_cap = 6561;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  InversionOptions inversion;
};

namespace detail {

inline std::vector<std::pair<Vote, double>> support_of(const VoteDistribution& d) {
  std::vector<std::pair<Vote, double>> s;
  if (d.alpha > 0.0) s.emplace_back(Vote::positive, d.alpha);
  if (d.beta > 0.0) s.emplace_back(Vote::negative, d.beta);
  if (d.gamma > 0.0) s.emplace_back(Vote::absent, d.gamma);
  return s;
}

// Number of states of `cells` i.i.d. entries over `symbols` letters, saturating at cap + 1.
inline std::size_t state_count(std::size_t symbols, std::size_t cells, std::size_t cap) {
  std::size_t s = 1;
  for (std::size_t c = 0; c < cells && s <= cap; ++c) s *= symbols;
  return s;
}

}  // namespace detail

/// CER of MV n averaged over the other m-1 columns drawn from `dist`, with
/// column n fixed to `counts`. The conditional error probability depends on
/// column n only through its counts, so the sensor order inside the column
/// is immaterial.
inline Estimate cer_given_counts(const VoteCounts& counts, const VoteDistribution& dist, std::size_t n,
                                 const SequenceLayout& layout, double xi, double noise_var,
                                 const Sampling& sampling = {}) {
  counts.validate();
  dist.validate();
  const std::size_t m = layout.m();
  const auto K = static_cast<std::size_t>(counts.total());
  if (K < 1) throw std::invalid_argument("cer_given_counts: need at least one sensor");
  if (n >= m) throw std::invalid_argument("cer_given_counts: MV index out of range");
  if (counts.plus == counts.minus) return {1.0, 0.0};

  VoteMatrix base(K, m);
  for (std::size_t k = 0; k < K; ++k) {
    const auto ki = static_cast<int>(k);
    base(k, n) = ki < counts.plus ? Vote::positive : (ki < counts.plus + counts.minus ? Vote::negative : Vote::absent);
  }
  const bool plus_wins = counts.plus > counts.minus;
  auto conditional = [&](const VoteMatrix& v) {
    const double f0 = cdf_metric_diff(rate_profile(v, xi, layout, noise_var), n, 0.0, layout, sampling.inversion);
    return plus_wins ? f0 : 1.0 - f0;
  };

  const auto support = detail::support_of(dist);
  const std::size_t cells = K * (m - 1);
  const std::size_t states = detail::state_count(support.size(), cells, sampling.exhaustive_cap);
  const bool enumerate = sampling.mode == SamplingMode::exhaustive ||
                         (sampling.mode == SamplingMode::automatic && states <= sampling.exhaustive_cap);
  if (enumerate) {
    if (states > sampling.exhaustive_cap) {
      throw std::invalid_argument("cer_given_counts: exhaustive state space exceeds the configured cap");
    }
    std::vector<std::pair<std::size_t, std::size_t>> cell_index;
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t c = 0; c < m; ++c)
        if (c != n) cell_index.emplace_back(k, c);
    std::vector<double> partial(states, 0.0);
    parallel_for(states, sampling.workers, [&](std::size_t s) {
      VoteMatrix v = base;
      double w = 1.0;
      std::size_t code = s;
      for (const auto& [k, c] : cell_index) {
        const auto& [vote, p] = support[code % support.size()];
        code /= support.size();
        v(k, c) = vote;
        w *= p;
      }
      partial[s] = w * conditional(v);
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return {total, 0.0};
  }

  const std::size_t trials = std::max<std::size_t>(1, sampling.trials);
  std::vector<double> vals(trials);
  parallel_for(trials, sampling.workers, [&](std::size_t t) {
    Rng rng = make_rng(sampling.seed, t);
    VoteMatrix v = base;
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t c = 0; c < m; ++c)
        if (c != n) v(k, c) = dist.draw(rng);
    vals[t] = conditional(v);
  });
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= static_cast<double>(trials);
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  const double se = trials > 1 ? std::sqrt(var / static_cast<double>(trials - 1) / static_cast<double>(trials)) : 0.0;
  return {mean, se};
}

namespace detail {

inline double log_or_neg_inf(double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); }

// log[C(K,k) C(K-k,l) a^k b^l g^(K-k-l)] with 0^0 = 1.
inline double log_trinomial_weight(int K, int k, int l, double la, double lb, double lg) {
  const int z = K - k - l;
  double w = std::lgamma(K + 1.0) - std::lgamma(k + 1.0) - std::lgamma(l + 1.0) - std::lgamma(z + 1.0);
  if (k > 0) w += k * la;
  if (l > 0) w += l * lb;
  if (z > 0) w += z * lg;
  return w;
}

}  // namespace detail

/// log-space P(MV = 0): the column holds equally many +1 and -1 votes.
inline double tie_probability(const VoteDistribution& dist, int K) {
  dist.validate();
  const double la = detail::log_or_neg_inf(dist.alpha), lb = detail::log_or_neg_inf(dist.beta),
               lg = detail::log_or_neg_inf(dist.gamma);
  double p = 0.0;
  for (int k = 0; 2 * k <= K; ++k) p += std::exp(detail::log_trinomial_weight(K, k, k, la, lb, lg));
  return std::min(1.0, p);
}

struct SystemCerOptions {
  Sampling sampling;
  /// Terms whose trinomial weight falls below this are skipped.
  double weight_cutoff = 1e-12;
};

struct SystemCer {
  double value = 0.0;
  double std_error = 0.0;
  double tie_probability = 0.0;
  double wrong_sign_probability = 0.0;
};

/// CER = P(d^ = -1, MV = +1) + P(d^ = +1, MV = -1) + P(MV = 0) with
/// trinomial weights over the counts of column n.
inline SystemCer system_cer(const VoteDistribution& dist, int K, const SequenceLayout& layout, double xi,
                            double noise_var, const SystemCerOptions& opts = {}) {
  dist.validate();
  if (K < 1) throw std::invalid_argument("system_cer: K must be >= 1");
  const double la = detail::log_or_neg_inf(dist.alpha), lb = detail::log_or_neg_inf(dist.beta),
               lg = detail::log_or_neg_inf(dist.gamma);
  struct Term {
    VoteCounts counts;
    double weight;
  };
  std::vector<Term> terms;
  for (int k = 0; k <= K; ++k) {
    for (int l = 0; k + l <= K; ++l) {
      if (k == l) continue;
      const double w = std::exp(detail::log_trinomial_weight(K, k, l, la, lb, lg));
      if (w < opts.weight_cutoff) continue;
      terms.push_back({{k, l, K - k - l}, w});
    }
  }
  // Workers parallelize across terms; each term runs its own samples serially.
  Sampling inner = opts.sampling;
  inner.workers = 1;
  std::vector<Estimate> pe(terms.size());
  parallel_for(terms.size(), opts.sampling.workers, [&](std::size_t t) {
    Sampling s = inner;
    s.seed = derive_seed(opts.sampling.seed, t);
    pe[t] = cer_given_counts(terms[t].counts, dist, 0, layout, xi, noise_var, s);
  });
  SystemCer out;
  double var = 0.0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    out.wrong_sign_probability += terms[t].weight * pe[t].value;
    var += terms[t].weight * terms[t].weight * pe[t].std_error * pe[t].std_error;
  }
  out.tie_probability = tie_probability(dist, K);
  out.value = std::min(1.0, out.wrong_sign_probability + out.tie_probability);
  out.std_error = std::sqrt(var);
  return out;
}

// --- resources -------------------------------------------------------------

/// MVs per real channel use: m / 2^(m+1).
inline double computation_rate(std::size_t m) {
  if (m < 1) throw std::invalid_argument("computation_rate: m must be >= 1");
  return static_cast<double>(m) / std::ldexp(1.0, static_cast<int>(m) + 1);
}

/// Resources relative to sending m bits from each of K sensors at r bit/s/Hz.
inline double resource_utilization(std::size_t m, std::size_t K, double r) {
  if (m < 1 || K < 1 || !(r > 0.0)) throw std::invalid_argument("resource_utilization: need m, K >= 1 and r > 0");
  return std::ldexp(1.0, static_cast<int>(m)) / (r * static_cast<double>(m) * static_cast<double>(K));
}

}  // namespace csoac
