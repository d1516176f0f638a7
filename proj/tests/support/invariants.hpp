#pragma once

// Property checks parameterized by a seed. The unit tests run each one under
// ten seeds through GoogleTest; the acceptance binary runs the same list.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "csoac/csoac.hpp"
#include "csoac/experiments.hpp"
#include "oracles.hpp"

namespace inv {

using namespace csoac;

struct Check {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

inline const std::vector<std::uint64_t>& seeds() {
  static const std::vector<std::uint64_t> s = {1, 2, 3, 5, 8, 13, 21, 34, 55, 89};
  return s;
}

inline std::string str(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

inline Permutation random_permutation(std::size_t m, Rng& rng) {
  std::vector<int> p(m);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return Permutation(p);
}

inline std::vector<Vote> random_votes(std::size_t m, Rng& rng) {
  std::vector<Vote> v(m);
  std::uniform_int_distribution<int> d(-1, 1);
  for (auto& x : v) x = vote_from_int(d(rng));
  return v;
}

// --- cs_core ---------------------------------------------------------------

inline Check norm_preservation(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 100);
  std::uniform_int_distribution<std::size_t> md(2, 8);
  std::uniform_real_distribution<double> xd(0.1, 8.0);
  for (int t = 0; t < 10000 && c.ok; ++t) {
    const std::size_t m = md(rng);
    const SequenceLayout layout(random_permutation(m, rng));
    const auto v = random_votes(m, rng);
    const double xi = xd(rng);
    const double e = encode_votes(layout, v, xi, 2, rng).norm_squared();
    const double L = std::ldexp(1.0, static_cast<int>(m));
    if (!(std::abs(e - L) < 1e-9 * L)) c.fail("m=" + std::to_string(m) + " xi=" + str(xi) + " norm^2=" + str(e));
  }
  return c;
}

inline Check half_split_identity(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 101);
  std::uniform_real_distribution<double> cd(-4.0, 4.0);
  for (std::size_t m = 1; m <= 8 && c.ok; ++m) {
    const SequenceLayout layout(random_permutation(m, rng));
    CsParams p;
    p.modulus = 2;
    p.phase.assign(m + 1, 0);
    p.amplitude.assign(m + 1, 0.0);
    for (std::size_t n = 1; n <= m; ++n) p.amplitude[n] = cd(rng);
    p.amplitude[0] = normalization_coefficient(std::span<const double>(p.amplitude).subspan(1));
    const auto seq = generate_cs(layout, p);
    const double L = std::ldexp(1.0, static_cast<int>(m));
    for (std::size_t n = 0; n < m; ++n) {
      double plus = 0.0, minus = 0.0;
      for (std::size_t i = 0; i < seq.elements.size(); ++i) {
        (layout.in_plus_half(i, n) ? plus : minus) += std::norm(seq.elements[i]);
      }
      const double w = std::exp(2.0 * p.amplitude[n + 1]);
      const double ep = w / (1.0 + w) * L, em = L / (1.0 + w);
      if (std::abs(plus - ep) > 1e-9 * ep || std::abs(minus - em) > 1e-9 * em) {
        c.fail("m=" + std::to_string(m) + " n=" + std::to_string(n) + " plus=" + str(plus) + " expected " + str(ep));
      }
    }
  }
  return c;
}

inline Check limit_masking(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 102);
  for (int t = 0; t < 200 && c.ok; ++t) {
    const std::size_t m = 1 + static_cast<std::size_t>(t % 8);
    const SequenceLayout layout(random_permutation(m, rng));
    const auto v = random_votes(m, rng);
    const auto e = draw_phase_coefficients(m, 2, rng);
    const auto a = encode_votes_with_phases(layout, v, 30.0, 2, e);
    const auto b = encode_votes_with_phases(layout, v, kXiInfinite, 2, e);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.elements.size(); ++i) diff = std::max(diff, std::abs(a.elements[i] - b.elements[i]));
    if (!(diff < 1e-10)) c.fail("m=" + std::to_string(m) + " max diff " + str(diff));
    // Masked half is exactly zero in the symbolic branch.
    for (std::size_t n = 0; n < m; ++n) {
      if (v[n] == Vote::absent) continue;
      for (std::size_t i = 0; i < b.elements.size(); ++i) {
        const bool plus = layout.in_plus_half(i, n);
        if ((v[n] == Vote::positive) != plus && b.elements[i] != cplx{0.0, 0.0}) c.fail("masked element nonzero");
      }
    }
  }
  return c;
}

inline Check gray_bijectivity(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 103);
  for (std::size_t m = 1; m <= 8 && c.ok; ++m) {
    std::vector<Permutation> perms = {Permutation::identity(m), Permutation::reversed(m)};
    for (int r = 0; r < 4; ++r) perms.push_back(random_permutation(m, rng));
    for (const auto& pi : perms) {
      std::vector<bool> seen(std::size_t{1} << m, false);
      for (std::size_t i = 0; i < seen.size(); ++i) {
        const auto x = bits_of(i, m);
        std::size_t g = 0;
        for (std::size_t n = 0; n < m; ++n) g |= std::size_t{tilde_monomial(x, pi, n)} << n;
        if (seen[g]) c.fail("collision at m=" + std::to_string(m));
        seen[g] = true;
      }
    }
  }
  return c;
}

inline Check table1_golden(std::uint64_t) {
  Check c;
  const double r2 = std::sqrt(2.0), r8 = 2.0 * std::sqrt(2.0);
  const std::vector<std::pair<std::vector<int>, std::vector<double>>> rows = {
      {{0, 0, 0}, {1, 1, 1, -1, 1, 1, -1, 1}},
      {{1, 0, 0}, {0, r2, r2, 0, 0, r2, -r2, 0}},
      {{1, 1, 0}, {0, 0, 2, 0, 0, 2, 0, 0}},
      {{1, 1, 1}, {0, 0, 0, 0, 0, r8, 0, 0}},
      {{1, 1, -1}, {0, 0, r8, 0, 0, 0, 0, 0}},
      {{1, -1, 0}, {0, 2, 0, 0, 0, 0, -2, 0}},
      {{-1, 0, 0}, {r2, 0, 0, -r2, r2, 0, 0, r2}},
  };
  const SequenceLayout layout(Permutation::from_one_based({3, 2, 1}));
  const std::vector<int> e(4, 0);
  for (const auto& [v, want] : rows) {
    const auto seq = encode_votes_with_phases(layout, make_votes({v[0], v[1], v[2]}), kXiInfinite, 2, e);
    for (std::size_t i = 0; i < 8; ++i) {
      if (std::abs(seq.elements[i] - cplx{want[i], 0.0}) > 1e-12) c.fail("row element " + std::to_string(i));
    }
  }
  return c;
}

// --- waveform --------------------------------------------------------------

inline Check parseval(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 200);
  for (std::size_t m = 1; m <= 8 && c.ok; ++m) {
    const SequenceLayout layout(m);
    const auto seq = encode_votes(layout, random_votes(m, rng), 1.5, 4, rng);
    for (std::size_t os : {4u, 8u}) {
      OfdmConfig cfg{fft_size_for(layout.length()), os, 0};
      const CVec x = synthesize(seq, cfg);
      double e = 0.0;
      for (const auto& z : x) e += std::norm(z);
      const double ref = seq.norm_squared();
      if (std::abs(e - ref) > 1e-9 * ref) c.fail("m=" + std::to_string(m) + " energy " + str(e) + " vs " + str(ref));
    }
  }
  return c;
}

inline Check pmepr_phase_invariance(std::uint64_t seed) {
  // Different coset draws move the peak around but never past the factor-2
  // bound; a global phase and a repeated draw leave PMEPR unchanged.
  Check c;
  Rng rng = make_rng(seed, 201);
  const double bound = 10.0 * std::log10(2.0 + 1e-6);
  for (int t = 0; t < 30 && c.ok; ++t) {
    const std::size_t m = 2 + static_cast<std::size_t>(t % 7);
    const SequenceLayout layout(m);
    const auto v = random_votes(m, rng);
    const OfdmConfig cfg{fft_size_for(layout.length()), 8, 0};
    for (int r = 0; r < 4; ++r) {
      Rng a = make_rng(seed, 1000 + 4 * t + r), b = a;
      auto seq = encode_votes(layout, v, kXiInfinite, 2, a);
      const double p = pmepr(synthesize(seq, cfg)).value_db;
      if (!(p <= bound)) c.fail("H=2 PMEPR " + str(p) + " dB above the factor-2 bound");
      if (pmepr(synthesize(encode_votes(layout, v, kXiInfinite, 2, b), cfg)).value_db != p) c.fail("same draw, different PMEPR");
      const cplx rot = std::polar(1.0, 0.7 * (r + 1));
      for (auto& z : seq.elements) z *= rot;
      if (std::abs(pmepr(synthesize(seq, cfg)).value_db - p) > 1e-6) c.fail("global phase changed PMEPR");
      const double p4 = pmepr(synthesize(encode_votes(layout, v, kXiInfinite, 4, rng), cfg)).value_db;
      if (!(p4 <= bound)) c.fail("H=4 PMEPR " + str(p4) + " dB above the factor-2 bound");
    }
  }
  return c;
}

inline Check oversampling_monotonic(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 202);
  for (int t = 0; t < 30 && c.ok; ++t) {
    const std::size_t m = 2 + static_cast<std::size_t>(t % 7);
    const SequenceLayout layout(m);
    const auto seq = encode_votes(layout, random_votes(m, rng), 2.0, 4, rng);
    double prev = -1.0, p8 = 0.0, p16 = 0.0;
    for (std::size_t os : {4u, 8u, 16u}) {
      const double p = pmepr(synthesize(seq, OfdmConfig{fft_size_for(layout.length()), os, 0})).value_db;
      if (p < prev - 1e-9) c.fail("PMEPR decreased with oversampling");
      prev = p;
      if (os == 8) p8 = p;
      if (os == 16) p16 = p;
    }
    if (!(p16 - p8 < 0.05)) c.fail("oversampling 8 vs 16 differ by " + str(p16 - p8) + " dB");
  }
  return c;
}

// --- channel ---------------------------------------------------------------

inline Check superpose_linearity(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 300);
  const std::size_t K = 5, len = 32;
  auto real = draw(ChannelModel{ChannelKind::selective_rayleigh, 0.0}, K, len, rng);
  std::vector<CVec> a(K, CVec(len)), b(K, CVec(len)), ab(K, CVec(len));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < len; ++i) {
      a[k][i] = complex_normal(rng, 1.0);
      b[k][i] = complex_normal(rng, 1.0);
      ab[k][i] = a[k][i] + b[k][i];
    }
  const CVec ra = superpose(a, real), rb = superpose(b, real), rab = superpose(ab, real);
  for (std::size_t i = 0; i < len; ++i)
    if (std::abs(rab[i] - ra[i] - rb[i]) > 1e-12) c.fail("superpose is not linear");
  // With noise, the noise enters once.
  for (auto& w : real.noise) w = complex_normal(rng, 0.5);
  const CVec na = superpose(a, real), nb = superpose(b, real), nab = superpose(ab, real);
  for (std::size_t i = 0; i < len; ++i)
    if (std::abs(nab[i] - (na[i] + nb[i] - real.noise[i])) > 1e-12) c.fail("noise added more than once");
  return c;
}

inline Check received_power(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 301);
  const std::size_t K = 4, m = 5, draws = 20000;
  const SequenceLayout layout(m);
  const ChannelModel model{ChannelKind::selective_rayleigh, 0.0};
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    std::vector<CVec> seqs;
    for (std::size_t k = 0; k < K; ++k) seqs.push_back(encode_votes(layout, random_votes(m, rng), 1.0, 2, rng).elements);
    const CVec r = superpose(seqs, draw(model, K, layout.length(), rng));
    double e = 0.0;
    for (const auto& z : r) e += std::norm(z);
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
  const double want = static_cast<double>(K) * std::ldexp(1.0, static_cast<int>(m));
  if (!(std::abs(mean - want) <= 3.0 * se)) c.fail("E||r||^2 = " + str(mean) + " +- " + str(se) + " vs " + str(want));
  return c;
}

inline Check gain_second_moment(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 302);
  const auto real = draw(ChannelModel{ChannelKind::selective_rayleigh, 1.0}, 1000, 1000, rng);
  double s = 0.0;
  for (const auto& h : real.gains) s += std::norm(h);
  s /= static_cast<double>(real.gains.size());
  if (!(std::abs(s - 1.0) < 0.005)) c.fail("mean |h|^2 = " + str(s));
  const auto flat = draw(ChannelModel{ChannelKind::flat_rayleigh, 1.0}, 3, 16, rng);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 1; i < 16; ++i)
      if (flat.gain(k, i) != flat.gain(k, 0)) c.fail("flat gains vary over subcarriers");
  return c;
}

// --- detect ----------------------------------------------------------------

inline Check energy_partition(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 400);
  for (std::size_t m = 1; m <= 8; ++m) {
    const SequenceLayout layout(random_permutation(m, rng));
    CVec r(layout.length());
    for (auto& z : r) z = complex_normal(rng, 3.0);
    double total = 0.0;
    for (const auto& z : r) total += std::norm(z);
    for (std::size_t n = 0; n < m; ++n) {
      const auto mp = metrics(r, n, layout);
      if (std::abs(mp.plus + mp.minus - total) > 1e-9 * total) c.fail("M+ + M- != ||r||^2");
    }
  }
  return c;
}

inline Check sign_flip_symmetry(std::uint64_t seed) {
  Check c;
  ProposedLinkConfig pc;
  pc.m = 4;
  pc.channel = ChannelModel::from_snr_db(ChannelKind::selective_rayleigh, 10.0);
  const ProposedLink link(pc);
  const auto a = simulate_cer(link, {0.5, 0.3, 0.2}, 10, 20000, derive_seed(seed, 1), 1);
  const auto b = simulate_cer(link, {0.3, 0.5, 0.2}, 10, 20000, derive_seed(seed, 2), 1);
  const double tol = 3.29 * std::hypot(a.std_error, b.std_error);
  if (!(std::abs(a.cer - b.cer) <= tol)) c.fail("CER " + str(a.cer) + " vs mirrored " + str(b.cer));
  return c;
}

inline Check single_sensor_noiseless(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 401);
  for (std::size_t m = 1; m <= 8; ++m) {
    const SequenceLayout layout(m);
    auto v = random_votes(m, rng);
    const std::size_t n = m - 1;
    v[n] = Vote::positive;
    const auto t = encode_votes(layout, v, kXiInfinite, 2, rng).elements;
    const CVec r = receive(std::vector<CVec>{t}, ChannelModel{ChannelKind::selective_rayleigh, 0.0}, rng);
    const auto mp = metrics(r, n, layout);
    if (mp.minus != 0.0) c.fail("M- not exactly zero");
    if (decide(mp, TieMode::error) != 1) c.fail("decision is not +1");
  }
  // Baseline: noiseless single sensor gives ||r||^2 / L = s whatever the phases.
  for (int vi = -1; vi <= 1; ++vi) {
    const auto r = goldenbaum_encode(vote_from_int(vi), 11, rng);
    double e = 0.0;
    for (const auto& z : r) e += std::norm(z);
    if (std::abs(e / 11.0 - (vi + 1)) > 1e-12) c.fail("baseline energy differs from symbol");
  }
  return c;
}

// --- analysis --------------------------------------------------------------

inline Check quadrature_vs_sampling(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 500);
  std::uniform_int_distribution<int> kd(1, 8);
  const std::size_t m = 3 + seed % 2;
  const SequenceLayout layout(m);
  const auto K = static_cast<std::size_t>(kd(rng));
  const auto votes = VoteMatrix::random(K, m, {0.4, 0.35, 0.25}, rng);
  const double xi = (seed % 3 == 0) ? kXiInfinite : 0.8;
  const auto prof = rate_profile(votes, xi, layout, 0.3);
  std::vector<double> mp, mm;
  for (std::size_t i = 0; i < layout.length(); ++i) (layout.in_plus_half(i, 0) ? mp : mm).push_back(prof.means[i]);
  // Points are multiples of the mean per-element rate.
  const double scale = std::accumulate(prof.means.begin(), prof.means.end(), 0.0) / prof.means.size();
  Rng orng = make_rng(seed, 501);
  for (double x : {-5.0, 0.0, 5.0}) {
    const double at = x * scale;
    double se = 0.0;
    const double emp = oracle::empirical_cdf(mp, mm, at, 1000000, orng, &se);
    const double F = cdf_metric_diff(prof, 0, at, layout);
    if (!(std::abs(F - emp) <= std::max(0.01, 3.0 * se))) {
      c.fail("x=" + str(at) + " F=" + str(F) + " empirical " + str(emp));
    }
  }
  return c;
}

inline Check inversion_antisymmetry(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 502);
  std::uniform_real_distribution<double> u(0.05, 4.0);
  HalfRates h;
  for (int i = 0; i < 6; ++i) h.plus.emplace_back(u(rng), 1 + i % 3);
  for (int i = 0; i < 5; ++i) h.minus.emplace_back(u(rng), 1 + i % 2);
  const HalfRates swapped{h.minus, h.plus};
  for (double x : {-3.0, -0.7, 0.0, 1.3, 4.0}) {
    const double a = cdf_from_rates(h, x), b = cdf_from_rates(swapped, -x);
    if (std::abs(a - (1.0 - b)) > 1e-6) c.fail("F(x)=" + str(a) + " but 1-F'(-x)=" + str(1.0 - b));
  }
  return c;
}

inline Check cer_bounds(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 503);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SequenceLayout layout(3);
  for (int t = 0; t < 3 && c.ok; ++t) {
    const double a = u(rng), g = (1.0 - a) * u(rng);
    const VoteDistribution d{a, 1.0 - a - g, g};
    SystemCerOptions o;
    o.sampling.mode = SamplingMode::monte_carlo;
    o.sampling.trials = 20;
    o.sampling.seed = seed;
    const int K = 3 + t;
    const auto s = system_cer(d, K, layout, kXiInfinite, 0.1, o);
    if (!(s.value >= 0.0 && s.value <= 1.0)) c.fail("CER outside [0,1]");
    if (!(s.value >= s.tie_probability - 1e-15)) c.fail("CER below the tie probability");
    const auto votes = VoteMatrix::random(static_cast<std::size_t>(K), 3, d, rng);
    const double p = cer_given_votes(votes, 1, 2.0, layout, 0.1);
    if (!(p >= 0.0 && p <= 1.0)) c.fail("cer_given_votes outside [0,1]");
  }
  return c;
}

inline Check corollary_limit(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 504);
  std::uniform_int_distribution<int> kd(0, 20);
  for (std::size_t m = 1; m <= 8; ++m) {
    const VoteCounts counts{kd(rng), kd(rng), kd(rng)};
    const double nv = 0.25 * static_cast<double>(m % 3);
    const auto a = expected_metrics(counts, 30.0, m, nv), b = expected_metrics(counts, kXiInfinite, m, nv);
    if (std::abs(a.plus - b.plus) > 1e-8 * std::max(1.0, b.plus) ||
        std::abs(a.minus - b.minus) > 1e-8 * std::max(1.0, b.minus)) {
      c.fail("xi=30 differs from the limit at m=" + std::to_string(m));
    }
    // The limits themselves give 2^m (K+ - K-) for the gap, not 2^(m-1).
    const double full = std::ldexp(1.0, static_cast<int>(m));
    if (std::abs((b.plus - b.minus) - full * (counts.plus - counts.minus)) > 1e-9 * std::max(1.0, b.plus)) {
      c.fail("E[M+] - E[M-] != 2^m (K+ - K-)");
    }
  }
  return c;
}

// --- control ---------------------------------------------------------------

inline Check speed_bound(std::uint64_t seed) {
  Check c;
  ControlConfig cfg;
  cfg.strategy = Strategy::continuous_ideal;
  cfg.rounds_per_waypoint = 2000;
  cfg.mu = 5.0;
  ProposedLinkConfig pc;
  pc.m = 3;
  pc.channel = ChannelModel::from_snr_db(ChannelKind::selective_rayleigh, 10.0);
  const ProposedLink link(pc);
  for (auto s : {Strategy::continuous_ideal, Strategy::mv_ideal, Strategy::mv_oac}) {
    cfg.strategy = s;
    const auto log = run_mission(cfg, &link, seed);
    for (const auto& r : log.rows)
      for (double u : r.velocity)
        if (!(std::abs(u) <= cfg.u_limit + 1e-12)) c.fail("|u| above u_limit");
  }
  return c;
}

struct BoundednessStats {
  std::vector<double> window_mean;  // tail averages of E[d^2], by window start
  std::vector<double> window_se;
  bool diverged = false;
};

inline BoundednessStats boundedness_stats(Strategy s, const MajorityVoteLink* link, std::uint64_t seed,
                                          std::size_t runs, std::size_t rounds) {
  ControlConfig cfg;
  cfg.strategy = s;
  cfg.rounds_per_waypoint = rounds;
  const Vec3 target = cfg.waypoints.front();
  const double d0 = distance(cfg.initial, target);
  std::vector<std::vector<double>> d2(runs);
  std::vector<char> diverged(runs, 0);
  parallel_for(runs, 1, [&](std::size_t r) {
    const auto log = run_mission(cfg, link, derive_seed(seed, r));
    std::array<bool, 3> crossed{false, false, false};
    d2[r].reserve(rounds);
    for (const auto& row : log.rows) {
      for (std::size_t l = 0; l < 3; ++l) {
        crossed[l] = crossed[l] || (row.position[l] - target[l]) * (cfg.initial[l] - target[l]) <= 0.0;
      }
      const double d = distance(row.position, target);
      if (crossed[0] && crossed[1] && crossed[2] && d > 2.0 * d0) diverged[r] = 1;
      d2[r].push_back(d * d);
    }
  });
  BoundednessStats st;
  st.diverged = std::any_of(diverged.begin(), diverged.end(), [](char v) { return v != 0; });
  const std::size_t win = 1000;
  for (std::size_t start = rounds >= 3 * win ? rounds - 3 * win : 0; start + win <= rounds; start += win / 2) {
    std::vector<double> per_run(runs);
    for (std::size_t r = 0; r < runs; ++r) {
      double s = 0.0;
      for (std::size_t l = start; l < start + win; ++l) s += d2[r][l];
      per_run[r] = s / win;
    }
    const double mean = std::accumulate(per_run.begin(), per_run.end(), 0.0) / runs;
    double var = 0.0;
    for (double v : per_run) var += (v - mean) * (v - mean);
    st.window_mean.push_back(mean);
    st.window_se.push_back(std::sqrt(var / (runs - 1) / runs));
  }
  return st;
}

inline Check ultimate_boundedness(std::uint64_t seed) {
  Check c;
  const auto st = boundedness_stats(Strategy::mv_ideal, nullptr, seed, 200, 5000);
  if (st.diverged) c.fail("a run moved beyond twice the initial distance after crossing the target");
  for (std::size_t w = 0; w < st.window_mean.size(); ++w) {
    if (!std::isfinite(st.window_mean[w]) || st.window_mean[w] > 4.0) c.fail("tail E[d^2] not bounded");
    if (w > 0) {
      // Non-increasing up to Monte Carlo resolution of the window averages.
      const double slack = 3.29 * std::hypot(st.window_se[w], st.window_se[w - 1]);
      if (st.window_mean[w] > st.window_mean[w - 1] + slack) {
        c.fail("tail E[d^2] increased: " + str(st.window_mean[w - 1]) + " -> " + str(st.window_mean[w]));
      }
    }
  }
  return c;
}

inline Check drift_sign(std::uint64_t seed) {
  Check c;
  Rng rng = make_rng(seed, 600);
  const double sigma = std::sqrt(2.0);
  const int K = 50;
  for (double d : {0.05, 0.3}) {
    const Vec3 target{0.0, 0.0, 0.0};
    const Vec3 p{d, d, d};
    const std::size_t draws = 100000;
    double s = 0.0, s2 = 0.0;
    for (std::size_t t = 0; t < draws; ++t) {
      const auto readings = observe(p, target, K, 2.0, rng);
      const double g = feedback(Strategy::mv_ideal, readings, target, nullptr, rng).g[0];
      s += g;
      s2 += g * g;
    }
    const double mean = s / draws, se = std::sqrt((s2 / draws - mean * mean) / draws);
    if (!(mean > 3.0 * se)) c.fail("E[g] not positive at d=" + str(d));
    const auto ph = mv_sign_probs(d, sigma, K);
    if (!(std::abs(mean - (ph.plus - ph.minus)) <= 3.29 * se)) {
      c.fail("E[g]=" + str(mean) + " vs phi+ - phi- = " + str(ph.plus - ph.minus));
    }
  }
  return c;
}

inline Check oac_approaches_ideal(std::uint64_t seed) {
  Check c;
  const Vec3 target{0.0, 0.0, 0.0};
  const Vec3 p{0.4, -0.25, 0.6};
  const std::size_t rounds = 10000;
  double prev = 2.0, prev_se = 0.0;
  for (double snr : {0.0, 10.0, 20.0, 30.0}) {
    ProposedLinkConfig pc;
    pc.m = 6;
    pc.channel = ChannelModel::from_snr_db(ChannelKind::selective_rayleigh, snr);
    const ProposedLink link(pc);
    Rng rng = make_rng(seed, 700);
    std::size_t dis = 0;
    for (std::size_t t = 0; t < rounds; ++t) {
      const auto readings = observe(p, target, 50, 2.0, rng);
      const auto fb = feedback(Strategy::mv_oac, readings, target, &link, rng);
      for (std::size_t l = 0; l < 3; ++l) dis += fb.mv_detected[l] != fb.mv_ideal[l];
    }
    const double rate = static_cast<double>(dis) / (3.0 * rounds);
    const double se = std::sqrt(rate * (1.0 - rate) / (3.0 * rounds));
    if (rate > prev + 3.29 * std::hypot(se, prev_se)) {
      c.fail("disagreement rose to " + str(rate) + " at " + str(snr) + " dB from " + str(prev));
    }
    prev = rate;
    prev_se = se;
  }
  return c;
}

// --- cli -------------------------------------------------------------------

inline std::string csv_of(const std::vector<cli::Output>& outs) {
  std::ostringstream os;
  for (const auto& o : outs) {
    os << "# " << o.suffix << '\n';
    o.table.write_csv(os);
  }
  return os.str();
}

inline Check worker_count_determinism(std::uint64_t seed) {
  Check c;
  using namespace csoac::cli;
  std::vector<ExperimentConfig> cfgs;
  auto sweep = ExperimentConfig::defaults(ExperimentId::cer_sweep);
  sweep.m = {3, 5};
  sweep.alpha = {0.2, 0.6};
  sweep.trials = 300;
  cfgs.push_back(sweep);
  auto pm = ExperimentConfig::defaults(ExperimentId::pmepr);
  pm.trials = 200;
  cfgs.push_back(pm);
  auto th = ExperimentConfig::defaults(ExperimentId::cer_theory);
  th.m = {3};
  th.sensors = 6;
  th.alpha = {0.45};
  th.trials = 200;
  th.theory_samples = 5;
  cfgs.push_back(th);
  auto uav = ExperimentConfig::defaults(ExperimentId::uav_single);
  uav.rounds_per_waypoint = 150;
  cfgs.push_back(uav);
  for (auto& cfg : cfgs) {
    cfg.seed = seed;
    cfg.workers = 1;
    const std::string a = csv_of(run(cfg));
    cfg.workers = 16;
    const std::string b = csv_of(run(cfg));
    if (a != b) c.fail(std::string(info_of(cfg.experiment).name) + " output depends on the worker count");
  }
  return c;
}

struct Entry {
  const char* module;
  const char* name;
  std::function<Check(std::uint64_t)> fn;
};

inline const std::vector<Entry>& all() {
  static const std::vector<Entry> e = {
      {"cs_core", "norm_preservation", norm_preservation},
      {"cs_core", "half_split_identity", half_split_identity},
      {"cs_core", "limit_masking", limit_masking},
      {"cs_core", "gray_bijectivity", gray_bijectivity},
      {"cs_core", "table1_golden", table1_golden},
      {"waveform", "parseval", parseval},
      {"waveform", "pmepr_phase_invariance", pmepr_phase_invariance},
      {"waveform", "oversampling_monotonic", oversampling_monotonic},
      {"channel", "superpose_linearity", superpose_linearity},
      {"channel", "received_power", received_power},
      {"channel", "gain_second_moment", gain_second_moment},
      {"detect", "energy_partition", energy_partition},
      {"detect", "sign_flip_symmetry", sign_flip_symmetry},
      {"detect", "single_sensor_noiseless", single_sensor_noiseless},
      {"analysis", "quadrature_vs_sampling", quadrature_vs_sampling},
      {"analysis", "inversion_antisymmetry", inversion_antisymmetry},
      {"analysis", "cer_bounds", cer_bounds},
      {"analysis", "corollary_limit", corollary_limit},
      {"control", "speed_bound", speed_bound},
      {"control", "ultimate_boundedness", ultimate_boundedness},
      {"control", "drift_sign", drift_sign},
      {"control", "oac_approaches_ideal", oac_approaches_ideal},
      {"cli", "worker_count_determinism", worker_count_determinism},
  };
  return e;
}

}  // namespace inv
