#pragma once

// Closed-loop waypoint flight: the UAV moves by -T * clamp(mu * g) each
// round, where g comes from the sensors' position estimates either directly
// (continuous), through an ideal majority vote, or through an OAC link.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "csoac/cs_core.hpp"
#include "csoac/link.hpp"
#include "csoac/rng.hpp"

namespace csoac {

using Vec3 = std::array<double, 3>;

enum class Strategy { continuous_ideal, mv_ideal, mv_oac };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::continuous_ideal: return "continuous_ideal";
    case Strategy::mv_ideal: return "mv_ideal";
    case Strategy::mv_oac: return "mv_oac";
  }
  return "?";
}

inline Strategy strategy_from_string(const std::string& s) {
  if (s == "continuous_ideal" || s == "continuous") return Strategy::continuous_ideal;
  if (s == "mv_ideal") return Strategy::mv_ideal;
  if (s == "mv_oac") return Strategy::mv_oac;
  throw std::invalid_argument("unknown strategy '" + s + "'");
}

enum class WaypointRule { fixed_rounds, arrival_radius };

struct ControlConfig {
  double t_update = 0.01;
  double mu = 2.0;
  double u_limit = 3.0;
  double sigma_s2 = 2.0;
  std::size_t sensors = 50;
  Strategy strategy = Strategy::mv_ideal;
  std::vector<Vec3> waypoints{{10.0, 8.0, 6.0}};
  Vec3 initial{0.0, 0.0, 0.0};
  WaypointRule rule = WaypointRule::fixed_rounds;
  std::size_t rounds_per_waypoint = 5000;
  double arrival_epsilon = 0.2;
  /// Round cap for the arrival-radius rule.
  std::size_t max_rounds = 100000;

  void validate() const {
    if (!(t_update > 0.0) || !(mu > 0.0) || !(u_limit > 0.0)) {
      throw std::invalid_argument("ControlConfig: t_update, mu and u_limit must be positive");
    }
    if (!(sigma_s2 >= 0.0)) throw std::invalid_argument("ControlConfig: sigma_s2 must be >= 0");
    if (sensors < 1) throw std::invalid_argument("ControlConfig: need at least one sensor");
    if (waypoints.empty()) throw std::invalid_argument("ControlConfig: waypoint list is empty");
    if (rule == WaypointRule::arrival_radius && !(arrival_epsilon > 0.0)) {
      throw std::invalid_argument("ControlConfig: arrival_epsilon must be positive");
    }
  }
};

struct UavState {
  Vec3 position{};
  std::size_t round = 0;
  std::size_t waypoint = 0;
};

/// Per-coordinate clamp of mu * g to [-u_limit, u_limit].
inline Vec3 velocity(const ControlConfig& cfg, const Vec3& g) {
  Vec3 u{};
  for (std::size_t l = 0; l < 3; ++l) u[l] = std::clamp(cfg.mu * g[l], -cfg.u_limit, cfg.u_limit);
  return u;
}

inline UavState step(const UavState& state, const ControlConfig& cfg, const Vec3& g) {
  UavState next = state;
  const Vec3 u = velocity(cfg, g);
  for (std::size_t l = 0; l < 3; ++l) next.position[l] -= cfg.t_update * u[l];
  ++next.round;
  return next;
}

struct SensorReading {
  Vec3 estimate{};
  std::array<Vote, 3> vote{};
};

/// Each sensor sees the true position plus N(0, sigma_s2) per coordinate.
inline std::vector<SensorReading> observe(const Vec3& position, const Vec3& target, std::size_t sensors,
                                          double sigma_s2, Rng& rng) {
  std::normal_distribution<double> err(0.0, std::sqrt(sigma_s2));
  std::vector<SensorReading> out(sensors);
  for (auto& s : out) {
    for (std::size_t l = 0; l < 3; ++l) {
      s.estimate[l] = position[l] + (sigma_s2 > 0.0 ? err(rng) : 0.0);
      s.vote[l] = vote_of_sign(s.estimate[l] - target[l]);
    }
  }
  return out;
}

struct Feedback {
  Vec3 g{};
  std::array<int, 3> mv_ideal{};
  std::array<int, 3> mv_detected{};
  bool detected = false;
};

/// g for the chosen strategy. When `link` is given the OAC detection is
/// computed (and logged) even if the strategy does not act on it; votes go
/// into MV slots 0..2 and the remaining slots carry absentee votes.
inline Feedback feedback(Strategy strategy, const std::vector<SensorReading>& readings, const Vec3& target,
                         const MajorityVoteLink* link, Rng& rng) {
  if (readings.empty()) throw std::invalid_argument("feedback: no sensor readings");
  if (strategy == Strategy::mv_oac && link == nullptr) {
    throw std::invalid_argument("feedback: mv_oac strategy needs an OAC link");
  }
  Feedback fb;
  for (std::size_t l = 0; l < 3; ++l) {
    int sum = 0;
    for (const auto& r : readings) sum += to_int(r.vote[l]);
    fb.mv_ideal[l] = sum > 0 ? 1 : (sum < 0 ? -1 : 0);
  }
  if (link != nullptr) {
    if (link->m() < 3) throw std::invalid_argument("feedback: OAC link must carry at least 3 MVs");
    VoteMatrix votes(readings.size(), link->m());
    for (std::size_t k = 0; k < readings.size(); ++k)
      for (std::size_t l = 0; l < 3; ++l) votes(k, l) = readings[k].vote[l];
    const auto d = link->compute(votes, rng);
    for (std::size_t l = 0; l < 3; ++l) fb.mv_detected[l] = d[l];
    fb.detected = true;
  }
  switch (strategy) {
    case Strategy::continuous_ideal:
      for (std::size_t l = 0; l < 3; ++l) {
        double mean = 0.0;
        for (const auto& r : readings) mean += r.estimate[l];
        fb.g[l] = mean / static_cast<double>(readings.size()) - target[l];
      }
      break;
    case Strategy::mv_ideal:
      for (std::size_t l = 0; l < 3; ++l) fb.g[l] = fb.mv_ideal[l];
      break;
    case Strategy::mv_oac:
      for (std::size_t l = 0; l < 3; ++l) fb.g[l] = fb.mv_detected[l];
      break;
  }
  return fb;
}

// --- convergence quantities -----------------------------------------------

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// alpha = 1 - Phi(-d/sigma_s), beta = Phi(-d/sigma_s), gamma = 0. With
/// sigma_s = 0 every sensor votes sign(d).
inline VoteDistribution vote_probs(double d, double sigma_s) {
  if (!(sigma_s >= 0.0)) throw std::invalid_argument("vote_probs: sigma_s must be >= 0");
  if (sigma_s == 0.0) {
    if (d > 0.0) return {1.0, 0.0, 0.0};
    if (d < 0.0) return {0.0, 1.0, 0.0};
    return {0.0, 0.0, 1.0};
  }
  const double beta = normal_cdf(-d / sigma_s);
  return {1.0 - beta, beta, 0.0};
}

struct SignProbs {
  double plus = 0.0;
  double minus = 0.0;
  double zero = 0.0;
};

/// Distribution of the ideal MV with K sensors and no absentees.
inline SignProbs mv_sign_probs(double d, double sigma_s, int K) {
  if (K < 1) throw std::invalid_argument("mv_sign_probs: K must be >= 1");
  const auto p = vote_probs(d, sigma_s);
  if (p.gamma > 0.0) return {0.0, 0.0, 1.0};
  const double la = p.alpha > 0.0 ? std::log(p.alpha) : -INFINITY;
  const double lb = p.beta > 0.0 ? std::log(p.beta) : -INFINITY;
  auto term = [&](int k, double l_major, double l_minor) {
    // C(K,k) major^(K-k) minor^k with 0^0 = 1.
    double w = std::lgamma(K + 1.0) - std::lgamma(k + 1.0) - std::lgamma(K - k + 1.0);
    if (K - k > 0) w += (K - k) * l_major;
    if (k > 0) w += k * l_minor;
    return std::exp(w);
  };
  SignProbs s;
  const int upper = (K + 1) / 2 - 1;  // ceil(K/2) - 1
  for (int k = 0; k <= upper; ++k) {
    s.plus += term(k, la, lb);
    s.minus += term(k, lb, la);
  }
  if (K % 2 == 0) s.zero = term(K / 2, la, lb);
  return s;
}

/// Largest |q| with (phi+(q) - phi-(q)) q = mu T / 2, by bisection. Beyond
/// it the mean-square drift of the ideal-MV loop is strictly negative.
inline double drift_threshold(double mu, double t_update, double sigma_s, int K) {
  if (!(sigma_s > 0.0)) return 0.0;
  const double target = 0.5 * mu * t_update;
  auto h = [&](double q) {
    const auto s = mv_sign_probs(q, sigma_s, K);
    return (s.plus - s.minus) * q - target;
  };
  double lo = 0.0, hi = sigma_s;
  while (h(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// --- missions --------------------------------------------------------------

struct TrajectoryRow {
  std::size_t round = 0;
  double t_sec = 0.0;
  Vec3 position{};
  Vec3 velocity{};
  Vec3 feedback{};
  std::array<int, 3> mv_ideal{};
  std::array<int, 3> mv_oac{};
  std::size_t waypoint = 0;
  /// Coordinates whose detected MV differs from the ideal MV.
  int cer_events = 0;
};

struct TrajectoryLog {
  std::vector<TrajectoryRow> rows;
  Vec3 final_position{};

  static constexpr const char* kHeader =
      "round,t_sec,x,y,z,ux,uy,uz,g1,g2,g3,mv_ideal1,mv_ideal2,mv_ideal3,mv_oac1,mv_oac2,mv_oac3,waypoint_idx";

  void write_csv(std::ostream& os) const {
    os << kHeader << '\n';
    char buf[64];
    auto num = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.10g", v);
      return std::string(buf);
    };
    for (const auto& r : rows) {
      os << r.round << ',' << num(r.t_sec);
      for (double v : r.position) os << ',' << num(v);
      for (double v : r.velocity) os << ',' << num(v);
      for (double v : r.feedback) os << ',' << num(v);
      for (int v : r.mv_ideal) os << ',' << v;
      for (int v : r.mv_oac) os << ',' << v;
      os << ',' << r.waypoint << '\n';
    }
  }
};

inline double distance(const Vec3& a, const Vec3& b) {
  double s = 0.0;
  for (std::size_t l = 0; l < 3; ++l) s += (a[l] - b[l]) * (a[l] - b[l]);
  return std::sqrt(s);
}

/// Runs the loop from cfg.initial through every waypoint. Round l logs the
/// position before its update. Sensor noise, phase coefficients and channel
/// are redrawn every round from the stream seeded by `seed`.
inline TrajectoryLog run_mission(const ControlConfig& cfg, const MajorityVoteLink* link, std::uint64_t seed) {
  cfg.validate();
  if (cfg.strategy == Strategy::mv_oac && link == nullptr) {
    throw std::invalid_argument("run_mission: mv_oac strategy needs an OAC link");
  }
  Rng rng = make_rng(seed, 0);
  TrajectoryLog log;
  UavState state{cfg.initial, 0, 0};
  const std::size_t budget = cfg.rule == WaypointRule::fixed_rounds ? cfg.rounds_per_waypoint * cfg.waypoints.size()
                                                                     : cfg.max_rounds;
  log.rows.reserve(budget);
  std::size_t in_segment = 0;
  while (state.round < budget && state.waypoint < cfg.waypoints.size()) {
    const Vec3& target = cfg.waypoints[state.waypoint];
    const auto readings = observe(state.position, target, cfg.sensors, cfg.sigma_s2, rng);
    const Feedback fb = feedback(cfg.strategy, readings, target, link, rng);

    TrajectoryRow row;
    row.round = state.round;
    row.t_sec = static_cast<double>(state.round) * cfg.t_update;
    row.position = state.position;
    row.velocity = velocity(cfg, fb.g);
    row.feedback = fb.g;
    row.mv_ideal = fb.mv_ideal;
    row.mv_oac = fb.mv_detected;
    row.waypoint = state.waypoint;
    if (fb.detected) {
      for (std::size_t l = 0; l < 3; ++l) row.cer_events += fb.mv_detected[l] != fb.mv_ideal[l];
    }
    log.rows.push_back(row);

    state = step(state, cfg, fb.g);
    ++in_segment;
    const bool advance = cfg.rule == WaypointRule::fixed_rounds
                             ? in_segment >= cfg.rounds_per_waypoint
                             : distance(state.position, target) <= cfg.arrival_epsilon;
    if (advance) {
      ++state.waypoint;
      in_segment = 0;
    }
  }
  log.final_position = state.position;
  return log;
}

}  // namespace csoac
