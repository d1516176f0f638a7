// Command-line driver for the experiments. Exit codes: 0 success,
// 2 invalid configuration, 3 numerical failure, 1 anything else.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csoac/experiments.hpp"

namespace {

using namespace csoac::cli;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> theory_samples;
  std::optional<std::string> scheme;
  std::optional<std::string> channel;
  std::vector<int> m;
  std::vector<double> alpha, gamma, snr_db;
  std::optional<int> sensors;
  std::vector<std::string> strategies;
};

void add_common(CLI::App* sub, CommonFlags& f, bool numeric) {
  sub->add_option("--config", f.config, "JSON configuration file");
  sub->add_option("--seed", f.seed, "64-bit base seed");
  sub->add_option("--workers", f.workers, "worker threads (0 = all cores)");
  sub->add_option("--out", f.out, "output CSV path");
  if (!numeric) return;
  sub->add_option("--trials", f.trials, "Monte Carlo trials per grid point");
}

ExperimentConfig build_config(ExperimentId id, const CommonFlags& f) {
  ExperimentConfig c = ExperimentConfig::defaults(id);
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("--config", "cannot open '" + f.config + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("--config", std::string("not valid JSON: ") + e.what());
    }
    c.apply_json(j);
  }
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.workers = *f.workers;
  if (f.out) c.out = *f.out;
  if (f.trials) c.trials = *f.trials;
  if (f.theory_samples) c.theory_samples = *f.theory_samples;
  if (f.scheme) c.scheme = *f.scheme;
  if (f.channel) c.channel = *f.channel;
  if (!f.m.empty()) c.m = f.m;
  if (!f.alpha.empty()) c.alpha = f.alpha;
  if (!f.gamma.empty()) c.gamma = f.gamma;
  if (!f.snr_db.empty()) c.snr_db = f.snr_db;
  if (f.sensors) c.sensors = *f.sensors;
  if (!f.strategies.empty()) c.strategies = f.strategies;
  return c;
}

int execute(ExperimentId id, const CommonFlags& f) {
  try {
    const ExperimentConfig c = build_config(id, f);
    c.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const auto outs = run(c);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& p : write_outputs(c, outs, wall)) std::cout << p.string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ExperimentFailure& e) {
    std::cerr << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complementary-sequence over-the-air majority vote experiments"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    ExperimentId id;
    bool numeric;
  };
  const std::vector<Sub> subs = {
      {"table1", ExperimentId::table1, false},       {"pmepr", ExperimentId::pmepr, true},
      {"cer-sweep", ExperimentId::cer_sweep, true},  {"cer-theory", ExperimentId::cer_theory, true},
      {"pe-vs-kplus", ExperimentId::pe_vs_kplus, true},
  };
  std::vector<CommonFlags> flags(subs.size() + 1);
  std::vector<CLI::App*> apps;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    auto* sub = app.add_subcommand(subs[i].name, info_of(subs[i].id).summary);
    add_common(sub, flags[i], subs[i].numeric);
    if (subs[i].numeric) {
      auto& f = flags[i];
      sub->add_option("--scheme", f.scheme, "proposed, goldenbaum or both");
      sub->add_option("--m", f.m, "MVs per channel use (grid)");
      sub->add_option("--alpha", f.alpha, "P(vote = +1) grid");
      sub->add_option("--gamma", f.gamma, "P(vote = 0) grid");
      sub->add_option("--snr-db", f.snr_db, "SNR grid in dB");
      sub->add_option("--channel", f.channel, "awgn, flat or selective");
      sub->add_option("-K,--sensors", f.sensors, "number of sensors");
      if (subs[i].id == ExperimentId::cer_theory || subs[i].id == ExperimentId::pe_vs_kplus) {
        sub->add_option("--theory-samples", f.theory_samples, "realizations averaged by the analytical CER");
      }
    }
    apps.push_back(sub);
  }

  auto& uf = flags.back();
  std::string scenario = "single";
  auto* uav = app.add_subcommand("uav-sim", "UAV waypoint flight under each feedback strategy");
  add_common(uav, uf, false);
  uav->add_option("--scenario", scenario, "single or multi")->check(CLI::IsMember({"single", "multi"}));
  uav->add_option("--strategy", uf.strategies, "continuous_ideal, mv_ideal, proposed_m<N>, goldenbaum_m<N>");
  uav->add_option("--snr-db", uf.snr_db, "SNR in dB");

  auto* list = app.add_subcommand("list", "list experiment ids");
  std::string which;
  auto* desc = app.add_subcommand("describe", "describe one experiment");
  desc->add_option("experiment", which, "experiment id")->required();
  std::string cols_of;
  auto* cols = app.add_subcommand("columns", "document the CSV columns of one experiment");
  cols->add_option("experiment", cols_of, "experiment id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    for (const auto& e : experiment_catalog()) std::printf("%-12s %s\n", e.name, e.figure);
    return 0;
  }
  if (desc->parsed()) {
    const auto id = experiment_from_string(which);
    if (!id) {
      std::cerr << "config error: field 'experiment': unknown experiment id '" << which << "'\n";
      return 2;
    }
    std::cout << describe(*id);
    return 0;
  }
  if (cols->parsed()) {
    const auto id = experiment_from_string(cols_of);
    if (!id) {
      std::cerr << "config error: field 'experiment': unknown experiment id '" << cols_of << "'\n";
      return 2;
    }
    std::cout << column_docs(*id);
    return 0;
  }
  if (uav->parsed()) return execute(scenario == "multi" ? ExperimentId::uav_multi : ExperimentId::uav_single, uf);
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (apps[i]->parsed()) return execute(subs[i].id, flags[i]);
  return 1;
}
