#pragma once

// OFDM synthesis and PMEPR measurement. The IDFT is unitary, so the
// time-domain energy of a symbol equals the energy of its subcarriers.

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "csoac/cs_core.hpp"
#include "csoac/parallel.hpp"
#include "csoac/rng.hpp"

namespace csoac {

struct OfdmConfig {
  std::size_t n_fft = 256;
  std::size_t oversampling = 8;
  std::size_t subcarrier_offset = 0;

  std::size_t window() const noexcept { return n_fft * oversampling; }

  void validate(std::size_t sequence_length) const {
    if (oversampling < 4) throw std::invalid_argument("OfdmConfig: oversampling must be >= 4");
    if (n_fft == 0 || sequence_length + subcarrier_offset > n_fft) {
      throw std::invalid_argument("OfdmConfig: sequence does not fit in the IDFT");
    }
  }
};

/// Smallest power of two holding `subcarriers`.
inline std::size_t fft_size_for(std::size_t subcarriers) { return std::bit_ceil(std::max<std::size_t>(subcarriers, 1)); }

struct PmeprSample {
  double value_db = 0.0;
};

class UndefinedInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Backward (inverse) DFT of a fixed size, one per thread and size. Only plan
// creation and destruction go through the global planner lock.
class InverseDft {
 public:
  explicit InverseDft(std::size_t n) : n_(n) {
    std::lock_guard lock(fftw_planner_mutex());
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  InverseDft(const InverseDft&) = delete;
  InverseDft& operator=(const InverseDft&) = delete;
  ~InverseDft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }

  CVec run(std::span<const cplx> spectrum) {
    std::memset(in_, 0, sizeof(fftw_complex) * n_);
    std::copy(spectrum.begin(), spectrum.end(), reinterpret_cast<cplx*>(in_));
    fftw_execute(plan_);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
    CVec out(n_);
    const auto* res = reinterpret_cast<const cplx*>(out_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = res[i] * scale;
    return out;
  }

  static InverseDft& for_size(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<InverseDft>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<InverseDft>(n);
    return *slot;
  }

 private:
  std::size_t n_;
  fftw_complex* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace detail

/// Maps `seq` onto subcarriers [offset, offset + len) of an n_fft grid,
/// zero-pads to oversampling * n_fft and returns the unitary IDFT.
inline CVec synthesize(std::span<const cplx> seq, const OfdmConfig& cfg) {
  cfg.validate(seq.size());
  CVec spectrum(cfg.window(), cplx{0.0, 0.0});
  std::copy(seq.begin(), seq.end(), spectrum.begin() + static_cast<std::ptrdiff_t>(cfg.subcarrier_offset));
  return detail::InverseDft::for_size(cfg.window()).run(spectrum);
}

inline CVec synthesize(const EncodedSequence& seq, const OfdmConfig& cfg) { return synthesize(seq.elements, cfg); }

/// 10 log10(peak / mean) with the mean over the whole window.
inline PmeprSample pmepr(std::span<const cplx> signal) {
  double peak = 0.0, total = 0.0;
  for (const auto& s : signal) {
    const double p = std::norm(s);
    peak = std::max(peak, p);
    total += p;
  }
  if (signal.empty() || !(total > 0.0)) throw UndefinedInput("pmepr: signal has zero mean power");
  const double mean = total / static_cast<double>(signal.size());
  return {std::max(0.0, 10.0 * std::log10(peak / mean))};
}

/// Builds the subcarrier vector transmitted for one vote vector.
using SubcarrierEncoder = std::function<CVec(std::span<const Vote>, Rng&)>;

struct CcdfTable {
  std::vector<double> threshold_db;
  std::vector<double> exceedance_prob;
  /// PMEPR of every transmitted symbol, in trial order.
  std::vector<double> samples_db;
  /// Trials whose symbol carried no energy (nothing transmitted).
  std::size_t silent = 0;
};

struct PmeprProtocol {
  std::size_t m = 8;
  std::size_t trials = 10000;
  VoteDistribution votes;
  OfdmConfig ofdm;
  std::vector<double> thresholds_db;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

inline std::vector<double> default_pmepr_thresholds() {
  std::vector<double> t;
  for (int i = 0; i <= 240; ++i) t.push_back(0.05 * i);
  return t;
}

/// Empirical P(PMEPR > threshold) over i.i.d. vote vectors. Trial t uses the
/// stream derive_seed(seed, t). Silent symbols are counted but excluded.
inline CcdfTable pmepr_ccdf(const SubcarrierEncoder& encoder, const PmeprProtocol& proto) {
  if (proto.trials < 1) throw std::invalid_argument("pmepr_ccdf: trials must be >= 1");
  proto.votes.validate();
  std::vector<double> values(proto.trials, -1.0);
  parallel_for(proto.trials, proto.workers, [&](std::size_t t) {
    Rng rng = make_rng(proto.seed, t);
    std::vector<Vote> v(proto.m);
    for (auto& x : v) x = proto.votes.draw(rng);
    const CVec sub = encoder(v, rng);
    double energy = 0.0;
    for (const auto& z : sub) energy += std::norm(z);
    if (!(energy > 0.0)) return;
    values[t] = pmepr(synthesize(sub, proto.ofdm)).value_db;
  });

  CcdfTable out;
  out.threshold_db = proto.thresholds_db.empty() ? default_pmepr_thresholds() : proto.thresholds_db;
  std::sort(out.threshold_db.begin(), out.threshold_db.end());
  for (double v : values) {
    if (v < 0.0) ++out.silent;
    else out.samples_db.push_back(v);
  }
  std::vector<double> sorted = out.samples_db;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  for (double thr : out.threshold_db) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), thr);
    out.exceedance_prob.push_back(n > 0 ? static_cast<double>(above) / n : 0.0);
  }
  return out;
}

}  // namespace csoac
