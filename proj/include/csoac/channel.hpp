#pragma once

// Frequency-domain multiple-access channel. The cyclic prefix is assumed to
// absorb timing error and delay spread, so each subcarrier sees one complex
// gain per sensor and the K transmissions add on it.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "csoac/cs_core.hpp"
#include "csoac/rng.hpp"

namespace csoac {

enum class ChannelKind { awgn_only, flat_rayleigh, selective_rayleigh };

inline const char* to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::awgn_only: return "awgn";
    case ChannelKind::flat_rayleigh: return "flat";
    case ChannelKind::selective_rayleigh: return "selective";
  }
  return "?";
}

inline ChannelKind channel_kind_from_string(const std::string& s) {
  if (s == "awgn" || s == "awgn_only") return ChannelKind::awgn_only;
  if (s == "flat" || s == "flat_rayleigh") return ChannelKind::flat_rayleigh;
  if (s == "selective" || s == "selective_rayleigh") return ChannelKind::selective_rayleigh;
  throw std::invalid_argument("unknown channel kind '" + s + "'");
}

/// Transmit power is 1 W per sensor, so SNR = 1 / noise_var.
struct ChannelModel {
  ChannelKind kind = ChannelKind::selective_rayleigh;
  double noise_var = 0.1;

  static ChannelModel from_snr_db(ChannelKind kind, double snr_db) {
    return {kind, std::pow(10.0, -snr_db / 10.0)};
  }
  double snr_db() const { return -10.0 * std::log10(noise_var); }

  void validate() const {
    if (!(noise_var >= 0.0)) throw std::invalid_argument("noise variance must be >= 0");
  }
};

struct ChannelRealization {
  std::size_t sensors = 0;
  std::size_t subcarriers = 0;
  /// Row-major sensors x subcarriers.
  CVec gains;
  CVec noise;

  cplx gain(std::size_t k, std::size_t i) const { return gains[k * subcarriers + i]; }
};

inline ChannelRealization draw(const ChannelModel& model, std::size_t sensors, std::size_t subcarriers, Rng& rng) {
  model.validate();
  if (sensors < 1 || subcarriers < 1) throw std::invalid_argument("draw: need at least one sensor and subcarrier");
  ChannelRealization r{sensors, subcarriers, CVec(sensors * subcarriers, cplx{1.0, 0.0}), CVec(subcarriers)};
  switch (model.kind) {
    case ChannelKind::awgn_only: break;
    case ChannelKind::flat_rayleigh:
      for (std::size_t k = 0; k < sensors; ++k) {
        const cplx h = complex_normal(rng, 1.0);
        for (std::size_t i = 0; i < subcarriers; ++i) r.gains[k * subcarriers + i] = h;
      }
      break;
    case ChannelKind::selective_rayleigh:
      for (auto& h : r.gains) h = complex_normal(rng, 1.0);
      break;
  }
  for (auto& w : r.noise) w = complex_normal(rng, model.noise_var);
  return r;
}

/// r_i = sum_k h[k,i] t_k[i] + w_i.
inline CVec superpose(std::span<const CVec> sequences, const ChannelRealization& real) {
  if (sequences.size() != real.sensors) throw std::invalid_argument("superpose: sensor count mismatch");
  CVec r = real.noise;
  for (std::size_t k = 0; k < sequences.size(); ++k) {
    if (sequences[k].size() != real.subcarriers) throw std::invalid_argument("superpose: sequence length mismatch");
    for (std::size_t i = 0; i < real.subcarriers; ++i) r[i] += real.gain(k, i) * sequences[k][i];
  }
  return r;
}

/// Same law as superpose(seqs, draw(...)) but only draws the gains that
/// multiply a nonzero element. Used on the Monte Carlo hot path where the
/// masked encoder leaves most elements at zero.
inline CVec receive(std::span<const CVec> sequences, const ChannelModel& model, Rng& rng) {
  model.validate();
  if (sequences.empty()) throw std::invalid_argument("receive: no sensors");
  const std::size_t len = sequences.front().size();
  CVec r(len, cplx{0.0, 0.0});
  for (const auto& t : sequences) {
    if (t.size() != len) throw std::invalid_argument("receive: sequence length mismatch");
    switch (model.kind) {
      case ChannelKind::awgn_only:
        for (std::size_t i = 0; i < len; ++i) r[i] += t[i];
        break;
      case ChannelKind::flat_rayleigh: {
        const cplx h = complex_normal(rng, 1.0);
        for (std::size_t i = 0; i < len; ++i) r[i] += h * t[i];
        break;
      }
      case ChannelKind::selective_rayleigh:
        for (std::size_t i = 0; i < len; ++i) {
          if (t[i] != cplx{0.0, 0.0}) r[i] += complex_normal(rng, 1.0) * t[i];
        }
        break;
    }
  }
  for (auto& v : r) v += complex_normal(rng, model.noise_var);
  return r;
}

}  // namespace csoac
