#pragma once

// Experiment harness behind the command-line tool: JSON configuration with
// per-experiment defaults, deterministic seeding and CSV tables.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "csoac/analysis.hpp"
#include "csoac/channel.hpp"
#include "csoac/control.hpp"
#include "csoac/cs_core.hpp"
#include "csoac/detect.hpp"
#include "csoac/link.hpp"
#include "csoac/montecarlo.hpp"
#include "csoac/parallel.hpp"
#include "csoac/rng.hpp"
#include "csoac/waveform.hpp"

#ifndef CSOAC_VERSION
#define CSOAC_VERSION "unknown"
#endif

namespace csoac::cli {

using nlohmann::json;

/// Invalid configuration; maps to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::invalid_argument("field '" + field + "': " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Numerical failure at a grid point; maps to exit code 3.
class ExperimentFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentId { table1, pmepr, cer_sweep, cer_theory, pe_vs_kplus, uav_single, uav_multi };

struct ExperimentInfo {
  ExperimentId id;
  const char* name;
  const char* figure;
  const char* summary;
  const char* defaults;
};

inline const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> c = {
      {ExperimentId::table1, "table1", "Table 1",
       "Encoded sequences for seven vote vectors, m=3, permutation (3,2,1), H=2, zero phase coefficients, "
       "xi -> infinity.",
       "no parameters"},
      {ExperimentId::pmepr, "pmepr", "Fig. 2",
       "CCDF of the OFDM-symbol PMEPR for the proposed scheme and the power-modulation baseline.",
       "scheme=both m=8 alpha=0.1 gamma in {0.1,0.3,0.6} trials=10000 oversampling=8"},
      {ExperimentId::cer_sweep, "cer_sweep", "Fig. 3",
       "Simulated CER against alpha for both schemes.",
       "scheme=both K=50 m in {4,6,8} gamma=0.1 alpha=0.05..0.95 channel=selective snr_db=10 trials=100000"},
      {ExperimentId::cer_theory, "cer_theory", "Fig. 3 (c),(d)",
       "Analytical CER of the proposed scheme next to its simulated CER, selective fading only.",
       "K=50 m=8 gamma=0.1 alpha=0.05..0.95 snr_db=10 trials=100000 theory_samples=200"},
      {ExperimentId::pe_vs_kplus, "pe_vs_kplus", "Fig. 4",
       "Error probability of one MV for fixed counts, K=50, K0=10, K+ = 22..40, SNR=10 dB, selective fading.",
       "scheme=both m in {3..7} k_zero=10 k_plus=22..40 regimes (1,0,0),(1/2,1/2,0),(0,0,1),(1/3,1/3,1/3) "
       "snr_db=10 trials=20000 theory_samples=200"},
      {ExperimentId::uav_single, "uav_single", "Fig. 5",
       "UAV flight from (0,0,0) to (10,8,6) under each feedback strategy.",
       "K=50 T=0.01 mu=2 u_limit=3 sigma_s2=2 snr_db=10 rounds_per_waypoint=5000 "
       "strategies continuous_ideal,mv_ideal,proposed_m3,proposed_m6,goldenbaum_m3,goldenbaum_m6"},
      {ExperimentId::uav_multi, "uav_multi", "Fig. 6",
       "UAV flight from (1,1,0) through the waypoints (1,1,6),(1,4,6),(6,4,6),(6,4,0).",
       "as uav_single with rounds_per_waypoint=1000"},
  };
  return c;
}

inline const ExperimentInfo& info_of(ExperimentId id) {
  for (const auto& e : experiment_catalog())
    if (e.id == id) return e;
  throw std::logic_error("info_of: unknown experiment");
}

inline std::optional<ExperimentId> experiment_from_string(std::string s) {
  for (auto& ch : s)
    if (ch == '-') ch = '_';
  for (const auto& e : experiment_catalog())
    if (s == e.name) return e.id;
  return std::nullopt;
}

struct Regime {
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  VoteDistribution dist() const { return {alpha, beta, gamma}; }
};

struct ExperimentConfig {
  ExperimentId experiment = ExperimentId::table1;
  std::string scheme = "both";
  std::vector<int> m{8};
  int sensors = 50;
  std::vector<double> snr_db{10.0};
  std::vector<double> alpha{0.1};
  std::vector<double> gamma{0.1};
  std::string channel = "selective";
  double xi = kXiInfinite;
  int modulus = 2;
  std::size_t trials = 100000;
  std::size_t theory_samples = 200;
  int k_zero = 10;
  std::vector<int> k_plus;
  std::vector<Regime> regimes;
  std::size_t oversampling = 8;
  std::string tie = "random";
  std::string baseline_amplitude = "power";

  std::vector<std::string> strategies;
  std::vector<Vec3> waypoints;
  Vec3 initial{};
  std::size_t rounds_per_waypoint = 5000;
  std::string waypoint_rule = "fixed_rounds";
  double arrival_epsilon = 0.2;
  std::size_t max_rounds = 100000;
  double t_update = 0.01, mu = 2.0, u_limit = 3.0, sigma_s2 = 2.0;

  std::uint64_t seed = 1;
  /// 0 selects the hardware concurrency.
  unsigned workers = 0;
  std::string out;

  static ExperimentConfig defaults(ExperimentId id);
  void apply_json(const json& j);
  json to_json() const;
  void validate() const;

  unsigned effective_workers() const { return workers == 0 ? default_workers() : workers; }
  std::string output_path() const { return out.empty() ? std::string(info_of(experiment).name) + ".csv" : out; }
};

namespace detail {

inline std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  const auto n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int i = 0; i <= n; ++i) g.push_back(std::round((lo + i * step) * 1e12) / 1e12);
  return g;
}

inline std::vector<int> int_range(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::defaults(ExperimentId id) {
  ExperimentConfig c;
  c.experiment = id;
  switch (id) {
    case ExperimentId::table1: break;
    case ExperimentId::pmepr:
      c.m = {8};
      c.alpha = {0.1};
      c.gamma = {0.1, 0.3, 0.6};
      c.trials = 10000;
      break;
    case ExperimentId::cer_sweep:
      c.m = {4, 6, 8};
      c.alpha = detail::grid(0.05, 0.95, 0.05);
      c.gamma = {0.1};
      break;
    case ExperimentId::cer_theory:
      c.scheme = "proposed";
      c.m = {8};
      c.alpha = detail::grid(0.05, 0.95, 0.05);
      c.gamma = {0.1};
      break;
    case ExperimentId::pe_vs_kplus:
      c.m = detail::int_range(3, 7);
      c.k_plus = detail::int_range(22, 40);
      c.regimes = {{1.0, 0.0, 0.0}, {0.5, 0.5, 0.0}, {0.0, 0.0, 1.0}, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
      c.trials = 20000;
      break;
    case ExperimentId::uav_single:
      c.strategies = {"continuous_ideal", "mv_ideal", "proposed_m3", "proposed_m6", "goldenbaum_m3", "goldenbaum_m6"};
      c.waypoints = {{10.0, 8.0, 6.0}};
      c.initial = {0.0, 0.0, 0.0};
      c.rounds_per_waypoint = 5000;
      break;
    case ExperimentId::uav_multi:
      c.strategies = {"continuous_ideal", "mv_ideal", "proposed_m3", "proposed_m6", "goldenbaum_m3", "goldenbaum_m6"};
      c.waypoints = {{1.0, 1.0, 6.0}, {1.0, 4.0, 6.0}, {6.0, 4.0, 6.0}, {6.0, 4.0, 0.0}};
      c.initial = {1.0, 1.0, 0.0};
      c.rounds_per_waypoint = 1000;
      break;
  }
  return c;
}

namespace detail {

template <class T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, std::string("wrong type (") + e.what() + ")");
  }
}

inline double get_xi(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinite") return kXiInfinite;
    throw ConfigError("xi", "expected a positive number or \"infinite\"");
  }
  if (!v.is_number()) throw ConfigError("xi", "expected a positive number or \"infinite\"");
  return v.get<double>();
}

inline Vec3 get_vec3(const json& v, const char* key) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(key, "expected an array of three numbers");
  Vec3 p{};
  for (std::size_t l = 0; l < 3; ++l) {
    if (!v[l].is_number()) throw ConfigError(key, "expected an array of three numbers");
    p[l] = v[l].get<double>();
  }
  return p;
}

}  // namespace detail

inline void ExperimentConfig::apply_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    const char* k = key.c_str();
    if (key == "experiment") {
      const auto id = experiment_from_string(detail::get_field<std::string>(j, k));
      if (!id) throw ConfigError(key, "unknown experiment id");
      if (*id != experiment) throw ConfigError(key, "does not match the selected subcommand");
    } else if (key == "scheme") scheme = detail::get_field<std::string>(j, k);
    else if (key == "m") m = v.is_array() ? detail::get_field<std::vector<int>>(j, k) : std::vector<int>{detail::get_field<int>(j, k)};
    else if (key == "K") sensors = detail::get_field<int>(j, k);
    else if (key == "snr_db") snr_db = v.is_array() ? detail::get_field<std::vector<double>>(j, k) : std::vector<double>{detail::get_field<double>(j, k)};
    else if (key == "alpha") alpha = v.is_array() ? detail::get_field<std::vector<double>>(j, k) : std::vector<double>{detail::get_field<double>(j, k)};
    else if (key == "gamma") gamma = v.is_array() ? detail::get_field<std::vector<double>>(j, k) : std::vector<double>{detail::get_field<double>(j, k)};
    else if (key == "channel") channel = detail::get_field<std::string>(j, k);
    else if (key == "xi") xi = detail::get_xi(v);
    else if (key == "modulus") modulus = detail::get_field<int>(j, k);
    else if (key == "trials") trials = detail::get_field<std::size_t>(j, k);
    else if (key == "theory_samples") theory_samples = detail::get_field<std::size_t>(j, k);
    else if (key == "k_zero") k_zero = detail::get_field<int>(j, k);
    else if (key == "k_plus") k_plus = detail::get_field<std::vector<int>>(j, k);
    else if (key == "regimes") {
      if (!v.is_array()) throw ConfigError(key, "expected an array of [alpha, beta, gamma] triples");
      regimes.clear();
      for (const auto& r : v) {
        const Vec3 t = detail::get_vec3(r, k);
        regimes.push_back({t[0], t[1], t[2]});
      }
    } else if (key == "oversampling") oversampling = detail::get_field<std::size_t>(j, k);
    else if (key == "tie") tie = detail::get_field<std::string>(j, k);
    else if (key == "baseline_amplitude") baseline_amplitude = detail::get_field<std::string>(j, k);
    else if (key == "strategies") strategies = detail::get_field<std::vector<std::string>>(j, k);
    else if (key == "waypoints") {
      if (!v.is_array()) throw ConfigError(key, "expected an array of 3-vectors");
      waypoints.clear();
      for (const auto& p : v) waypoints.push_back(detail::get_vec3(p, k));
    } else if (key == "initial") initial = detail::get_vec3(v, k);
    else if (key == "rounds_per_waypoint") rounds_per_waypoint = detail::get_field<std::size_t>(j, k);
    else if (key == "waypoint_rule") waypoint_rule = detail::get_field<std::string>(j, k);
    else if (key == "arrival_epsilon") arrival_epsilon = detail::get_field<double>(j, k);
    else if (key == "max_rounds") max_rounds = detail::get_field<std::size_t>(j, k);
    else if (key == "T_update") t_update = detail::get_field<double>(j, k);
    else if (key == "mu") mu = detail::get_field<double>(j, k);
    else if (key == "u_limit") u_limit = detail::get_field<double>(j, k);
    else if (key == "sigma_s2") sigma_s2 = detail::get_field<double>(j, k);
    else if (key == "seed") seed = detail::get_field<std::uint64_t>(j, k);
    else if (key == "workers") workers = detail::get_field<unsigned>(j, k);
    else if (key == "out") out = detail::get_field<std::string>(j, k);
    else throw ConfigError(key, "unknown field");
  }
}

inline json ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = info_of(experiment).name;
  j["seed"] = seed;
  j["out"] = output_path();
  switch (experiment) {
    case ExperimentId::table1: return j;
    case ExperimentId::uav_single:
    case ExperimentId::uav_multi: {
      j["strategies"] = strategies;
      j["waypoints"] = waypoints;
      j["initial"] = initial;
      j["rounds_per_waypoint"] = rounds_per_waypoint;
      j["waypoint_rule"] = waypoint_rule;
      j["arrival_epsilon"] = arrival_epsilon;
      j["max_rounds"] = max_rounds;
      j["T_update"] = t_update;
      j["mu"] = mu;
      j["u_limit"] = u_limit;
      j["sigma_s2"] = sigma_s2;
      j["K"] = sensors;
      j["snr_db"] = snr_db;
      j["tie"] = tie;
      return j;
    }
    default: break;
  }
  j["scheme"] = scheme;
  j["m"] = m;
  j["K"] = sensors;
  j["snr_db"] = snr_db;
  j["alpha"] = alpha;
  j["gamma"] = gamma;
  j["channel"] = channel;
  j["xi"] = std::isinf(xi) ? json("infinite") : json(xi);
  j["modulus"] = modulus;
  j["trials"] = trials;
  j["tie"] = tie;
  j["baseline_amplitude"] = baseline_amplitude;
  if (experiment == ExperimentId::pmepr) j["oversampling"] = oversampling;
  if (experiment == ExperimentId::cer_theory || experiment == ExperimentId::pe_vs_kplus) {
    j["theory_samples"] = theory_samples;
  }
  if (experiment == ExperimentId::pe_vs_kplus) {
    j["k_zero"] = k_zero;
    j["k_plus"] = k_plus;
    json r = json::array();
    for (const auto& g : regimes) r.push_back({g.alpha, g.beta, g.gamma});
    j["regimes"] = r;
  }
  return j;
}

namespace detail {

struct StrategySpec {
  Strategy strategy = Strategy::continuous_ideal;
  std::string scheme;  // "proposed", "goldenbaum" or empty
  std::size_t m = 0;
};

inline StrategySpec parse_strategy(const std::string& s) {
  if (s == "continuous_ideal") return {Strategy::continuous_ideal, "", 0};
  if (s == "mv_ideal") return {Strategy::mv_ideal, "", 0};
  for (const char* scheme : {"proposed", "goldenbaum"}) {
    const std::string prefix = std::string(scheme) + "_m";
    if (s.rfind(prefix, 0) == 0) {
      const std::string tail = s.substr(prefix.size());
      if (tail.empty() || tail.find_first_not_of("0123456789") != std::string::npos) break;
      const auto m = static_cast<std::size_t>(std::stoul(tail));
      if (m < 3 || m > 16) throw ConfigError("strategies", "'" + s + "': m must lie in 3..16");
      return {Strategy::mv_oac, scheme, m};
    }
  }
  throw ConfigError("strategies", "unknown strategy '" + s +
                                      "' (expected continuous_ideal, mv_ideal, proposed_m<N> or goldenbaum_m<N>)");
}

inline TieMode tie_from_string(const std::string& s) {
  if (s == "random") return TieMode::random;
  if (s == "zero") return TieMode::zero;
  if (s == "error") return TieMode::error;
  throw ConfigError("tie", "expected random, zero or error");
}

inline BaselineAmplitude amplitude_from_string(const std::string& s) {
  if (s == "power") return BaselineAmplitude::power;
  if (s == "square") return BaselineAmplitude::square;
  throw ConfigError("baseline_amplitude", "expected power or square");
}

inline bool feasible(double a, double g) { return a + g <= 1.0 + 1e-12; }

}  // namespace detail

inline void ExperimentConfig::validate() const {
  if (experiment == ExperimentId::table1) return;
  const bool uav = experiment == ExperimentId::uav_single || experiment == ExperimentId::uav_multi;
  if (sensors < 1) throw ConfigError("K", "must be >= 1");
  if (snr_db.empty()) throw ConfigError("snr_db", "grid is empty");
  for (double s : snr_db)
    if (!std::isfinite(s)) throw ConfigError("snr_db", "entries must be finite");
  detail::tie_from_string(tie);
  if (uav) {
    if (strategies.empty()) throw ConfigError("strategies", "list is empty");
    for (const auto& s : strategies) detail::parse_strategy(s);
    if (waypoints.empty()) throw ConfigError("waypoints", "list is empty");
    if (waypoint_rule != "fixed_rounds" && waypoint_rule != "arrival_radius") {
      throw ConfigError("waypoint_rule", "expected fixed_rounds or arrival_radius");
    }
    if (rounds_per_waypoint < 1) throw ConfigError("rounds_per_waypoint", "must be >= 1");
    if (!(t_update > 0.0)) throw ConfigError("T_update", "must be > 0");
    if (!(mu > 0.0)) throw ConfigError("mu", "must be > 0");
    if (!(u_limit > 0.0)) throw ConfigError("u_limit", "must be > 0");
    if (!(sigma_s2 >= 0.0)) throw ConfigError("sigma_s2", "must be >= 0");
    if (!(arrival_epsilon > 0.0)) throw ConfigError("arrival_epsilon", "must be > 0");
    return;
  }
  if (scheme != "proposed" && scheme != "goldenbaum" && scheme != "both") {
    throw ConfigError("scheme", "expected proposed, goldenbaum or both");
  }
  if (m.empty()) throw ConfigError("m", "grid is empty");
  for (int v : m)
    if (v < 1 || v > 16) throw ConfigError("m", "entries must lie in 1..16");
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  if (!(xi > 0.0)) throw ConfigError("xi", "must be > 0");
  if (modulus < 2 || modulus % 2 != 0) throw ConfigError("modulus", "must be an even integer >= 2");
  detail::amplitude_from_string(baseline_amplitude);
  try {
    channel_kind_from_string(channel);
  } catch (const std::invalid_argument&) {
    throw ConfigError("channel", "expected awgn, flat or selective");
  }
  if (experiment == ExperimentId::pe_vs_kplus) {
    if (k_plus.empty()) throw ConfigError("k_plus", "grid is empty");
    if (regimes.empty()) throw ConfigError("regimes", "list is empty");
    if (k_zero < 0 || k_zero > sensors) throw ConfigError("k_zero", "must lie in 0..K");
    for (int kp : k_plus)
      if (kp < 0 || kp + k_zero > sensors) throw ConfigError("k_plus", "entries must satisfy 0 <= K+ <= K - K0");
    for (const auto& r : regimes) {
      try {
        r.dist().validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("regimes", e.what());
      }
    }
    if (theory_samples < 1) throw ConfigError("theory_samples", "must be >= 1");
    return;
  }
  if (alpha.empty()) throw ConfigError("alpha", "grid is empty");
  if (gamma.empty()) throw ConfigError("gamma", "grid is empty");
  for (double a : alpha)
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alpha", "entries must lie in [0, 1]");
  for (double g : gamma)
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("gamma", "entries must lie in [0, 1]");
  bool any = false;
  for (double a : alpha)
    for (double g : gamma) any = any || detail::feasible(a, g);
  if (!any) throw ConfigError("alpha", "no grid point satisfies alpha + gamma <= 1");
  if (experiment == ExperimentId::pmepr) {
    if (oversampling < 4) throw ConfigError("oversampling", "must be >= 4");
    if (snr_db.size() != 1) throw ConfigError("snr_db", "pmepr does not use a channel; give at most one value");
  }
  if (experiment == ExperimentId::cer_theory) {
    if (channel_kind_from_string(channel) != ChannelKind::selective_rayleigh) {
      throw ConfigError("channel", "the analytical CER assumes frequency-selective fading");
    }
    if (theory_samples < 1) throw ConfigError("theory_samples", "must be >= 1");
  }
}

// --- tables ----------------------------------------------------------------

inline std::string format_number(double v, int digits = 10) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  json metadata = json::object();

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size()) throw std::logic_error("ResultTable: row width differs from schema");
    rows.push_back(std::move(cells));
  }

  void write_csv(std::ostream& os) const {
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << r[c];
      os << '\n';
    }
  }
};

/// One CSV produced by an experiment. An empty suffix means the output path itself.
struct Output {
  std::string suffix;
  ResultTable table;
};

namespace detail {

inline std::string num(double v) { return format_number(v); }
inline std::string num(int v) { return std::to_string(v); }
inline std::string num(std::size_t v) { return std::to_string(v); }

inline std::string gamma_tag(double g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", g);
  return buf;
}

inline ChannelModel channel_model(const ExperimentConfig& c, double snr) {
  return ChannelModel::from_snr_db(channel_kind_from_string(c.channel), snr);
}

inline std::vector<std::string> schemes_of(const ExperimentConfig& c) {
  if (c.scheme == "both") return {"proposed", "goldenbaum"};
  return {c.scheme};
}

inline std::unique_ptr<MajorityVoteLink> make_link(const ExperimentConfig& c, const std::string& scheme,
                                                   std::size_t m, const ChannelModel& ch) {
  if (scheme == "proposed") {
    ProposedLinkConfig pc;
    pc.m = m;
    pc.xi = c.xi;
    pc.modulus = c.modulus;
    pc.channel = ch;
    pc.tie = tie_from_string(c.tie);
    return std::make_unique<ProposedLink>(pc);
  }
  BaselineLinkConfig bc;
  bc.m = m;
  bc.channel = ch;
  bc.amplitude = amplitude_from_string(c.baseline_amplitude);
  return std::make_unique<BaselineLink>(bc);
}

// Block length reported in the L column: 2^m for the proposed scheme,
// round(2^m / m) for the baseline.
inline std::size_t block_length(const std::string& scheme, std::size_t m) {
  return scheme == "proposed" ? (std::size_t{1} << m) : goldenbaum_layout(m).block_length;
}

inline std::string point_name(double a, double g, int m, double snr) {
  return "alpha=" + format_number(a) + " gamma=" + format_number(g) + " m=" + std::to_string(m) +
         " snr_db=" + format_number(snr);
}

}  // namespace detail

// --- experiments -----------------------------------------------------------

inline std::vector<Output> run_table1() {
  const SequenceLayout layout(Permutation::from_one_based({3, 2, 1}));
  const std::vector<std::vector<int>> rows = {{0, 0, 0},  {1, 0, 0},  {1, 1, 0}, {1, 1, 1},
                                              {1, 1, -1}, {1, -1, 0}, {-1, 0, 0}};
  ResultTable t;
  t.columns = {"v1", "v2", "v3"};
  for (int i = 0; i < 8; ++i) t.columns.push_back("t" + std::to_string(i));
  const std::vector<int> zero_phase(4, 0);
  for (const auto& r : rows) {
    const auto votes = make_votes({r[0], r[1], r[2]});
    const auto seq = encode_votes_with_phases(layout, votes, kXiInfinite, 2, zero_phase);
    std::vector<std::string> cells{std::to_string(r[0]), std::to_string(r[1]), std::to_string(r[2])};
    for (const auto& z : seq.elements) {
      if (z.imag() != 0.0) throw std::logic_error("table1: unexpected imaginary part");
      cells.push_back(format_number(z.real() == 0.0 ? 0.0 : z.real(), 17));
    }
    t.add_row(std::move(cells));
  }
  return {{"", std::move(t)}};
}

inline std::vector<Output> run_pmepr(const ExperimentConfig& c) {
  std::vector<Output> outs;
  const auto m = static_cast<std::size_t>(c.m.front());
  std::uint64_t curve = 0;
  json summary = json::array();
  for (const auto& scheme : detail::schemes_of(c)) {
    for (double a : c.alpha) {
      for (double g : c.gamma) {
        const std::uint64_t idx = curve++;
        if (!detail::feasible(a, g)) continue;
        PmeprProtocol p;
        p.m = m;
        p.trials = c.trials;
        p.votes = {a, std::max(0.0, 1.0 - a - g), g};
        p.seed = derive_seed(c.seed, idx);
        p.workers = c.effective_workers();
        SubcarrierEncoder enc;
        std::size_t len = 0;
        if (scheme == "proposed") {
          auto layout = std::make_shared<SequenceLayout>(m);
          len = layout->length();
          const double xi = c.xi;
          const int H = c.modulus;
          enc = [layout, xi, H](std::span<const Vote> v, Rng& rng) {
            return encode_votes(*layout, v, xi, H, rng).elements;
          };
        } else {
          const BaselineLayout bl = goldenbaum_layout(m);
          len = bl.subcarriers();
          const auto mode = detail::amplitude_from_string(c.baseline_amplitude);
          enc = [bl, mode](std::span<const Vote> v, Rng& rng) { return goldenbaum_transmit(v, bl, rng, mode); };
        }
        p.ofdm.n_fft = fft_size_for(len);
        p.ofdm.oversampling = c.oversampling;
        const CcdfTable ccdf = pmepr_ccdf(enc, p);
        ResultTable t;
        t.columns = {"threshold_db", "exceedance_prob"};
        for (std::size_t i = 0; i < ccdf.threshold_db.size(); ++i) {
          t.add_row({format_number(ccdf.threshold_db[i]), format_number(ccdf.exceedance_prob[i])});
        }
        double peak = 0.0;
        for (double v : ccdf.samples_db) peak = std::max(peak, v);
        t.metadata = {{"scheme", scheme}, {"alpha", a}, {"gamma", g}, {"silent_symbols", ccdf.silent},
                      {"max_pmepr_db", peak}, {"n_fft", p.ofdm.n_fft}};
        summary.push_back(t.metadata);
        std::string suffix = scheme;
        if (c.alpha.size() > 1) suffix += ".alpha" + detail::gamma_tag(a);
        suffix += ".gamma" + detail::gamma_tag(g);
        outs.push_back({suffix, std::move(t)});
      }
    }
  }
  return outs;
}

inline std::vector<Output> run_cer_sweep(const ExperimentConfig& c) {
  struct Point {
    std::string scheme;
    double a, g, snr;
    int m;
    std::uint64_t index;
  };
  std::vector<Point> pts;
  std::uint64_t idx = 0;
  for (const auto& scheme : detail::schemes_of(c))
    for (double g : c.gamma)
      for (int m : c.m)
        for (double snr : c.snr_db)
          for (double a : c.alpha) {
            const std::uint64_t i = idx++;
            if (detail::feasible(a, g)) pts.push_back({scheme, a, g, snr, m, i});
          }
  ResultTable t;
  t.columns = {"scheme", "channel", "alpha", "beta", "gamma", "m", "L", "snr_db", "cer_sim", "mc_stderr"};
  const std::string ch = to_string(channel_kind_from_string(c.channel));
  for (const auto& p : pts) {
    const auto link = detail::make_link(c, p.scheme, static_cast<std::size_t>(p.m), detail::channel_model(c, p.snr));
    const VoteDistribution d{p.a, std::max(0.0, 1.0 - p.a - p.g), p.g};
    const auto e = simulate_cer(*link, d, static_cast<std::size_t>(c.sensors), c.trials, derive_seed(c.seed, p.index),
                                c.effective_workers());
    t.add_row({p.scheme, ch, detail::num(p.a), detail::num(d.beta), detail::num(p.g), detail::num(p.m),
               detail::num(detail::block_length(p.scheme, static_cast<std::size_t>(p.m))), detail::num(p.snr),
               detail::num(e.cer), detail::num(e.std_error)});
  }
  return {{"", std::move(t)}};
}

inline std::vector<Output> run_cer_theory(const ExperimentConfig& c) {
  ResultTable t;
  t.columns = {"alpha", "beta", "gamma", "m", "snr_db", "cer_theory", "cer_sim", "mc_stderr"};
  std::uint64_t idx = 0;
  for (double g : c.gamma)
    for (int m : c.m)
      for (double snr : c.snr_db)
        for (double a : c.alpha) {
          const std::uint64_t i = idx++;
          if (!detail::feasible(a, g)) continue;
          const VoteDistribution d{a, std::max(0.0, 1.0 - a - g), g};
          const SequenceLayout layout(static_cast<std::size_t>(m));
          const ChannelModel ch = detail::channel_model(c, snr);
          SystemCerOptions opts;
          opts.sampling.trials = c.theory_samples;
          opts.sampling.seed = derive_seed(c.seed, 2 * i);
          opts.sampling.workers = c.effective_workers();
          SystemCer th;
          try {
            th = system_cer(d, c.sensors, layout, c.xi, ch.noise_var, opts);
          } catch (const NumericalFailure& e) {
            throw ExperimentFailure("numerical failure at " + detail::point_name(a, g, m, snr) + ": " + e.what());
          }
          const auto link = detail::make_link(c, "proposed", static_cast<std::size_t>(m), ch);
          const auto sim = simulate_cer(*link, d, static_cast<std::size_t>(c.sensors), c.trials,
                                        derive_seed(c.seed, 2 * i + 1), c.effective_workers());
          t.add_row({detail::num(a), detail::num(d.beta), detail::num(g), detail::num(m), detail::num(snr),
                     detail::num(th.value), detail::num(sim.cer), detail::num(sim.std_error)});
        }
  return {{"", std::move(t)}};
}

inline std::vector<Output> run_pe_vs_kplus(const ExperimentConfig& c) {
  ResultTable t;
  t.columns = {"scheme", "alpha", "beta", "gamma", "m", "L", "k_plus", "k_minus", "k_zero",
               "pe_theory", "theory_stderr", "pe_sim", "mc_stderr"};
  const double snr = c.snr_db.front();
  const ChannelModel ch = detail::channel_model(c, snr);
  std::uint64_t idx = 0;
  for (const auto& scheme : detail::schemes_of(c))
    for (const auto& r : c.regimes)
      for (int m : c.m)
        for (int kp : c.k_plus) {
          const std::uint64_t i = idx++;
          const VoteCounts counts{kp, c.sensors - c.k_zero - kp, c.k_zero};
          const auto mm = static_cast<std::size_t>(m);
          double th = std::numeric_limits<double>::quiet_NaN(), th_se = th;
          if (scheme == "proposed") {
            Sampling s;
            s.trials = c.theory_samples;
            s.seed = derive_seed(c.seed, 2 * i);
            s.workers = c.effective_workers();
            try {
              const auto e = cer_given_counts(counts, r.dist(), 0, SequenceLayout(mm), c.xi, ch.noise_var, s);
              th = e.value;
              th_se = e.std_error;
            } catch (const NumericalFailure& e) {
              throw ExperimentFailure("numerical failure at alpha=" + format_number(r.alpha) +
                                      " beta=" + format_number(r.beta) + " gamma=" + format_number(r.gamma) +
                                      " m=" + std::to_string(m) + " k_plus=" + std::to_string(kp) + ": " + e.what());
            }
          }
          const auto link = detail::make_link(c, scheme, mm, ch);
          const auto sim = simulate_cer_given_counts(*link, counts, r.dist(), c.trials, derive_seed(c.seed, 2 * i + 1),
                                                     c.effective_workers());
          t.add_row({scheme, detail::num(r.alpha), detail::num(r.beta), detail::num(r.gamma), detail::num(m),
                     detail::num(detail::block_length(scheme, mm)), detail::num(counts.plus),
                     detail::num(counts.minus), detail::num(counts.zero), detail::num(th), detail::num(th_se),
                     detail::num(sim.cer), detail::num(sim.std_error)});
        }
  return {{"", std::move(t)}};
}

inline ControlConfig control_config(const ExperimentConfig& c, Strategy s) {
  ControlConfig cc;
  cc.t_update = c.t_update;
  cc.mu = c.mu;
  cc.u_limit = c.u_limit;
  cc.sigma_s2 = c.sigma_s2;
  cc.sensors = static_cast<std::size_t>(c.sensors);
  cc.strategy = s;
  cc.waypoints = c.waypoints;
  cc.initial = c.initial;
  cc.rule = c.waypoint_rule == "arrival_radius" ? WaypointRule::arrival_radius : WaypointRule::fixed_rounds;
  cc.rounds_per_waypoint = c.rounds_per_waypoint;
  cc.arrival_epsilon = c.arrival_epsilon;
  cc.max_rounds = c.max_rounds;
  return cc;
}

inline std::vector<Output> run_uav(const ExperimentConfig& c) {
  const ChannelModel ch = ChannelModel::from_snr_db(ChannelKind::selective_rayleigh, c.snr_db.front());
  std::vector<Output> outs(c.strategies.size());
  // Every strategy flies with the same seed; missions are independent, so they run in parallel.
  parallel_for(c.strategies.size(), c.effective_workers(), [&](std::size_t s) {
    const auto spec = detail::parse_strategy(c.strategies[s]);
    std::unique_ptr<MajorityVoteLink> link;
    if (!spec.scheme.empty()) link = detail::make_link(c, spec.scheme, spec.m, ch);
    const auto log = run_mission(control_config(c, spec.strategy), link.get(), c.seed);
    ResultTable t;
    std::string header = TrajectoryLog::kHeader;
    std::stringstream hs(header);
    for (std::string col; std::getline(hs, col, ',');) t.columns.push_back(col);
    for (const auto& r : log.rows) {
      std::vector<std::string> cells{detail::num(r.round), detail::num(r.t_sec)};
      for (double v : r.position) cells.push_back(detail::num(v));
      for (double v : r.velocity) cells.push_back(detail::num(v));
      for (double v : r.feedback) cells.push_back(detail::num(v));
      for (int v : r.mv_ideal) cells.push_back(detail::num(v));
      for (int v : r.mv_oac) cells.push_back(detail::num(v));
      cells.push_back(detail::num(r.waypoint));
      t.add_row(std::move(cells));
    }
    std::size_t events = 0;
    for (const auto& r : log.rows) events += static_cast<std::size_t>(r.cer_events);
    t.metadata = {{"strategy", c.strategies[s]},
                  {"final_position", log.final_position},
                  {"mv_disagreements", events}};
    outs[s] = {c.strategies[s], std::move(t)};
  });
  return outs;
}

inline std::vector<Output> run(const ExperimentConfig& c) {
  c.validate();
  switch (c.experiment) {
    case ExperimentId::table1: return run_table1();
    case ExperimentId::pmepr: return run_pmepr(c);
    case ExperimentId::cer_sweep: return run_cer_sweep(c);
    case ExperimentId::cer_theory: return run_cer_theory(c);
    case ExperimentId::pe_vs_kplus: return run_pe_vs_kplus(c);
    case ExperimentId::uav_single:
    case ExperimentId::uav_multi: return run_uav(c);
  }
  throw std::logic_error("run: unknown experiment");
}

/// `<stem>.<suffix><ext>` next to `out`, or `out` itself for an empty suffix.
inline std::filesystem::path path_for(const std::filesystem::path& out, const std::string& suffix) {
  if (suffix.empty()) return out;
  auto p = out;
  const std::string ext = out.has_extension() ? out.extension().string() : std::string(".csv");
  p.replace_filename(out.stem().string() + "." + suffix + ext);
  return p;
}

/// Writes every table and a `<out>.meta.json` sidecar with the config echo,
/// version and wall time. CSV bytes depend on (config, seed) only.
inline std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& c, const std::vector<Output>& outs,
                                                        double wall_seconds) {
  const std::filesystem::path base = c.output_path();
  if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
  std::vector<std::filesystem::path> written;
  json files = json::array();
  for (const auto& o : outs) {
    const auto p = path_for(base, o.suffix);
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
    o.table.write_csv(f);
    written.push_back(p);
    json entry = o.table.metadata;
    entry["file"] = p.filename().string();
    entry["rows"] = o.table.rows.size();
    files.push_back(entry);
  }
  json meta = {{"config", c.to_json()},
               {"version", CSOAC_VERSION},
               {"wall_time_sec", wall_seconds},
               {"outputs", files}};
  std::ofstream mf(base.string() + ".meta.json");
  mf << meta.dump(2) << '\n';
  return written;
}

inline std::string describe(ExperimentId id) {
  const auto& e = info_of(id);
  std::ostringstream os;
  os << e.name << " (reproduces " << e.figure << ")\n  " << e.summary << "\n  defaults: " << e.defaults << "\n";
  os << "  effective configuration:\n" << ExperimentConfig::defaults(id).to_json().dump(2) << "\n";
  return os.str();
}

/// Column reference for the CSV an experiment writes, for plotting scripts.
inline std::string column_docs(ExperimentId id) {
  switch (id) {
    case ExperimentId::table1:
      return "v1,v2,v3        vote vector\n"
             "t0..t7          real encoded elements (imaginary parts are zero)\n";
    case ExperimentId::pmepr:
      return "one file per curve: <stem>.<scheme>.gamma<g>.csv\n"
             "threshold_db    PMEPR threshold\n"
             "exceedance_prob fraction of OFDM symbols with PMEPR above the threshold\n";
    case ExperimentId::cer_sweep:
      return "scheme          proposed | goldenbaum\n"
             "channel         awgn | flat | selective\n"
             "alpha,beta,gamma vote probabilities\n"
             "m               MVs per channel use\n"
             "L               subcarriers per MV block (2^m proposed, round(2^m/m) baseline)\n"
             "snr_db          per-sensor SNR\n"
             "cer_sim         simulated computation error rate\n"
             "mc_stderr       its standard error\n";
    case ExperimentId::cer_theory:
      return "alpha,beta,gamma vote probabilities\n"
             "m, snr_db       operating point\n"
             "cer_theory      analytical CER including the tie term\n"
             "cer_sim         simulated CER at the same point\n"
             "mc_stderr       simulation standard error\n";
    case ExperimentId::pe_vs_kplus:
      return "scheme          proposed | goldenbaum\n"
             "alpha,beta,gamma law of the other MVs' votes\n"
             "m, L            MVs per channel use, block length\n"
             "k_plus,k_minus,k_zero fixed counts of the observed MV\n"
             "pe_theory       analytical error probability (nan for the baseline)\n"
             "theory_stderr   sampling error of pe_theory\n"
             "pe_sim          simulated error probability\n"
             "mc_stderr       simulation standard error\n";
    case ExperimentId::uav_single:
    case ExperimentId::uav_multi:
      return "one file per strategy: <stem>.<strategy>.csv\n"
             "round, t_sec    update index and time\n"
             "x,y,z           position before the update\n"
             "ux,uy,uz        applied velocity\n"
             "g1,g2,g3        feedback\n"
             "mv_ideal1..3    MV under perfect communication\n"
             "mv_oac1..3      MV detected over the air (0 when no link is used)\n"
             "waypoint_idx    active waypoint\n";
  }
  return {};
}

}  // namespace csoac::cli
