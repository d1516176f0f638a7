#pragma once

// Link-level Monte Carlo: draw vote matrices, run a link, compare with the
// ideal MV. Trial t always uses the stream derive_seed(seed, t), so results
// do not depend on the worker count.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "csoac/cs_core.hpp"
#include "csoac/link.hpp"
#include "csoac/parallel.hpp"
#include "csoac/rng.hpp"

namespace csoac {

struct CerEstimate {
  double cer = 0.0;
  /// Standard error over per-trial error fractions.
  double std_error = 0.0;
  std::size_t trials = 0;
  std::size_t errors = 0;

  /// Half-width of the normal-approximation band at z standard errors.
  double half_width(double z) const { return z * std_error; }
};

namespace detail {

inline CerEstimate summarize_error_counts(const std::vector<std::uint32_t>& errs, std::size_t per_trial) {
  CerEstimate e;
  e.trials = errs.size();
  // Integer histogram keeps the reduction order-independent.
  std::vector<std::size_t> hist(per_trial + 1, 0);
  for (auto v : errs) {
    ++hist[v];
    e.errors += v;
  }
  const double n = static_cast<double>(errs.size());
  const double mean = static_cast<double>(e.errors) / (n * static_cast<double>(per_trial));
  double ss = 0.0;
  for (std::size_t v = 0; v <= per_trial; ++v) {
    const double d = static_cast<double>(v) / static_cast<double>(per_trial) - mean;
    ss += static_cast<double>(hist[v]) * d * d;
  }
  e.cer = mean;
  e.std_error = errs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return e;
}

}  // namespace detail

/// Fraction of MVs detected differently from the ideal MV. A tied column
/// (ideal MV 0) always counts as an error.
inline CerEstimate simulate_cer(const MajorityVoteLink& link, const VoteDistribution& dist, std::size_t sensors,
                                std::size_t trials, std::uint64_t seed, unsigned workers) {
  dist.validate();
  if (sensors < 1 || trials < 1) throw std::invalid_argument("simulate_cer: need K >= 1 and trials >= 1");
  const std::size_t m = link.m();
  std::vector<std::uint32_t> errs(trials, 0);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng rng = make_rng(seed, t);
    const VoteMatrix votes = VoteMatrix::random(sensors, m, dist, rng);
    const auto d = link.compute(votes, rng);
    std::uint32_t e = 0;
    for (std::size_t n = 0; n < m; ++n) {
      const int ideal = votes.ideal_mv(n);
      e += ideal == 0 || d[n] != ideal;
    }
    errs[t] = e;
  });
  return detail::summarize_error_counts(errs, m);
}

/// Error rate of MV 0 with its column fixed to `counts`; the other columns
/// are redrawn from `dist` each trial.
inline CerEstimate simulate_cer_given_counts(const MajorityVoteLink& link, const VoteCounts& counts,
                                             const VoteDistribution& dist, std::size_t trials, std::uint64_t seed,
                                             unsigned workers) {
  counts.validate();
  dist.validate();
  const auto K = static_cast<std::size_t>(counts.total());
  if (K < 1 || trials < 1) throw std::invalid_argument("simulate_cer_given_counts: need K >= 1 and trials >= 1");
  const std::size_t m = link.m();
  const int ideal = counts.plus > counts.minus ? 1 : (counts.plus < counts.minus ? -1 : 0);
  std::vector<std::uint32_t> errs(trials, 0);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng rng = make_rng(seed, t);
    VoteMatrix votes = VoteMatrix::random(K, m, dist, rng);
    for (std::size_t k = 0; k < K; ++k) {
      const auto ki = static_cast<int>(k);
      votes(k, 0) = ki < counts.plus ? Vote::positive
                                     : (ki < counts.plus + counts.minus ? Vote::negative : Vote::absent);
    }
    const auto d = link.compute(votes, rng);
    errs[t] = ideal == 0 || d[0] != ideal;
  });
  return detail::summarize_error_counts(errs, 1);
}

}  // namespace csoac
