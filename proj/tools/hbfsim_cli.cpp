// SPDX-License-Identifier: Apache-2.0
//
// hbfsim command line: paired Monte Carlo campaigns and exhaustive-search
// cross-checks.
//
//   hbfsim simulate --config configs/desk.json --alloc 5gnr,ciaba --out out/
//   hbfsim oracle-check --config configs/oracle.json
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include "hbfsim/hbfsim.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::vector<hbf::AllocMode> parse_modes(const std::string& list) {
  std::vector<hbf::AllocMode> modes;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) modes.push_back(hbf::parse_mode(item));
  if (modes.empty()) throw hbf::ConfigError("--alloc needs at least one mode");
  return modes;
}

hbf::NetworkConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides) {
  hbf::NetworkConfig cfg = hbf::load_config(path);
  for (const auto& o : overrides) hbf::apply_override(cfg, o);
  hbf::validate(cfg);
  return cfg;
}

void print_mode_line(const hbf::CampaignResult& result, hbf::AllocMode mode) {
  const auto s = hbf::summarize(result.pooled(mode), result.cfg);
  std::printf("%-9s coverage %.3f  median SINR %7.2f dB  median rate %8.1f Mbps  secondary BPL %.3f\n",
              std::string(hbf::mode_name(mode)).c_str(), s.coverage, s.median_sinr_db,
              s.median_rate_bps / 1e6, s.secondary_bpl_share);
}

int simulate(const std::string& config_path, const std::string& alloc, std::optional<std::uint64_t> seed,
             const std::string& out_dir, std::optional<int> realizations,
             const std::vector<std::string>& overrides, bool quiet) {
  hbf::NetworkConfig cfg = resolve_config(config_path, overrides);
  if (seed) cfg.seed = *seed;
  if (realizations) cfg.n_realizations = *realizations;
  hbf::validate(cfg);
  const auto modes = parse_modes(alloc);

  hbf::LogSink log;
  if (!quiet) log = [](const std::string& msg) { std::cerr << msg << '\n'; };
  const auto result = hbf::run_campaign(cfg, modes, log);
  const auto files = hbf::emit(result, out_dir);
  for (auto m : modes) print_mode_line(result, m);
  std::printf("records: %s\nsummary: %s\nfailures: %d\n", files.records.c_str(),
              files.summary.c_str(), result.failures());
  return result.failures() == 0 ? 0 : kExitRuntime;
}

/// Runs each realization through exhaustive search and the heuristics and
/// reports whether the search result dominates.
int oracle_check(const std::string& config_path, const std::vector<std::string>& overrides) {
  const hbf::NetworkConfig cfg = resolve_config(config_path, overrides);
  int violations = 0;
  for (int id = 0; id < cfg.n_realizations; ++id) {
    const hbf::Realization r = hbf::build_realization(cfg, id);
    const hbf::LinkEvaluator ev(r);
    const double oracle =
        hbf::network_report(ev, hbf::allocate_oracle(ev)).summary.sum_rate_bps;
    std::printf("realization %d (%d gNBs, %d UEs): oracle %.6g bps", id, r.num_gnbs(),
                r.num_ues(), oracle);
    bool ok = true;
    for (auto m : {hbf::AllocMode::kFiveGNr, hbf::AllocMode::kDiaba, hbf::AllocMode::kCiaba}) {
      const double v = hbf::network_report(ev, hbf::allocate(ev, m)).summary.sum_rate_bps;
      const bool dominated = oracle >= v * (1.0 - 1e-12);
      ok = ok && dominated;
      std::printf("  %s %.6g%s", std::string(hbf::mode_name(m)).c_str(), v, dominated ? "" : " (!)");
    }
    std::printf("  %s\n", ok ? "dominates" : "VIOLATION");
    violations += !ok;
  }
  std::printf("%d of %d realizations violate oracle dominance\n", violations, cfg.n_realizations);
  return violations == 0 ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mm-wave multi-cell hybrid beamforming simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string alloc = "5gnr,diaba,ciaba";
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  bool quiet = false;

  auto* sim = app.add_subcommand("simulate", "run a paired Monte Carlo campaign");
  sim->add_option("--config", config_path, "JSON configuration file")->required();
  sim->add_option("--alloc", alloc, "comma-separated modes: 5gnr,diaba,ciaba,oracle,dbf,cbf-tdma");
  sim->add_option("--seed", seed, "campaign seed");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--realizations", realizations, "number of realizations");
  sim->add_option("--override", overrides, "key=value configuration override (repeatable)");
  sim->add_flag("--quiet", quiet, "no progress on stderr");

  auto* oracle = app.add_subcommand("oracle-check", "compare exhaustive search with the heuristics");
  oracle->add_option("--config", config_path, "JSON configuration file")->required();
  oracle->add_option("--override", overrides, "key=value configuration override (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return simulate(config_path, alloc, seed, out_dir, realizations, overrides, quiet);
    return oracle_check(config_path, overrides);
  } catch (const hbf::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
