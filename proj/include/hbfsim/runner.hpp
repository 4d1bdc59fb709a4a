// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo campaigns: every requested mode runs on the same realization
// (paired comparison), results go to a per-UE CSV and a JSON summary.

#pragma once

#include "hbfsim/allocation.hpp"
#include "hbfsim/config.hpp"
#include "hbfsim/network.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

namespace hbf {

inline constexpr int kSchemaVersion = 1;

struct ModeRun {
  AllocMode mode = AllocMode::kFiveGNr;
  NetworkReport report;
  double alloc_seconds = 0.0;
  std::string error;  // non-empty when this mode failed on the realization

  bool failed() const { return !error.empty(); }
};

struct RealizationRun {
  int realization_id = 0;
  std::uint64_t hash = 0;
  int num_gnbs = 0;
  int num_ues = 0;
  std::vector<ModeRun> modes;
  std::string error;  // realization could not be built

  bool failed() const { return !error.empty(); }
};

struct CampaignResult {
  NetworkConfig cfg;
  std::vector<AllocMode> modes;
  std::vector<RealizationRun> realizations;

  int failures() const {
    int n = 0;
    for (const auto& r : realizations) {
      if (r.failed()) {
        ++n;
        continue;
      }
      for (const auto& m : r.modes) n += m.failed();
    }
    return n;
  }

  /// All link reports of one mode, pooled over successful realizations.
  std::vector<LinkReport> pooled(AllocMode mode) const {
    std::vector<LinkReport> out;
    for (const auto& r : realizations)
      for (const auto& m : r.modes)
        if (m.mode == mode && !m.failed())
          out.insert(out.end(), m.report.links.begin(), m.report.links.end());
    return out;
  }
};

using LogSink = std::function<void(const std::string&)>;

/// Runs every mode on one realization.
inline RealizationRun run_realization(const NetworkConfig& cfg, int id,
                                      const std::vector<AllocMode>& modes,
                                      const LogSink& log = {}) {
  RealizationRun out;
  out.realization_id = id;
  Realization r;
  try {
    r = build_realization(cfg, id);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    out.error = e.what();
    if (log) log("realization " + std::to_string(id) + ": " + out.error);
    return out;
  }
  out.hash = realization_hash(r);
  out.num_gnbs = r.num_gnbs();
  out.num_ues = r.num_ues();
  for (AllocMode mode : modes) {
    ModeRun run;
    run.mode = mode;
    try {
      const LinkEvaluator ev(r);
      const auto t0 = std::chrono::steady_clock::now();
      const Allocation a = allocate(ev, mode);
      run.alloc_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      run.report = network_report(ev, a);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      run.error = e.what();
      if (log)
        log("realization " + std::to_string(id) + " mode " + std::string(mode_name(mode)) + ": " +
            run.error);
    }
    out.modes.push_back(std::move(run));
  }
  return out;
}

inline CampaignResult run_campaign(const NetworkConfig& cfg, const std::vector<AllocMode>& modes,
                                   const LogSink& log = {}) {
  validate(cfg);
  CampaignResult result;
  result.cfg = cfg;
  result.modes = modes;
  for (int id = 0; id < cfg.n_realizations; ++id) {
    result.realizations.push_back(run_realization(cfg, id, modes, log));
    if (log) log("realization " + std::to_string(id + 1) + "/" + std::to_string(cfg.n_realizations) + " done");
  }
  return result;
}

// ---------------------------------------------------------------------------
// Emission

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::floor(q * (v.size() - 1) + 0.5));
  return v[std::min(idx, v.size() - 1)];
}

}  // namespace detail

inline constexpr const char* kRecordColumns =
    "realization,mode,ue,gnb,served,rss_w,i_intra_w,i_inter_w,noise_w,sinr_db,inr_db,"
    "intra_inr_db,inter_inr_db,snr_db,rate_bps,alloc_rank,is_los,is_handover";

inline void write_records(std::ostream& out, const CampaignResult& result) {
  out << "# hbfsim records schema " << kSchemaVersion << '\n' << kRecordColumns << '\n';
  using detail::fmt_double;
  for (const auto& r : result.realizations)
    for (const auto& m : r.modes) {
      if (m.failed()) continue;
      for (const auto& l : m.report.links) {
        out << r.realization_id << ',' << mode_name(m.mode) << ',' << l.ue << ',' << l.gnb << ','
            << int(l.served) << ',' << fmt_double(l.rss_w) << ',' << fmt_double(l.i_intra_w) << ','
            << fmt_double(l.i_inter_w) << ',' << fmt_double(l.noise_w) << ','
            << fmt_double(l.sinr_db) << ',' << fmt_double(l.inr_db) << ','
            << fmt_double(l.intra_inr_db) << ',' << fmt_double(l.inter_inr_db) << ','
            << fmt_double(l.snr_db) << ',' << fmt_double(l.rate_bps) << ',' << l.alloc_rank << ','
            << int(l.is_los) << ',' << int(l.is_handover) << '\n';
      }
    }
}

/// Pooled statistics of one mode over the campaign.
inline nlohmann::json mode_summary(const CampaignResult& result, AllocMode mode) {
  using detail::finite_or_null;
  const auto links = result.pooled(mode);
  const NetworkSummary s = summarize(links, result.cfg);
  nlohmann::json j;
  int realizations = 0;
  double sum_rate_total = 0.0;
  for (const auto& r : result.realizations)
    for (const auto& m : r.modes)
      if (m.mode == mode && !m.failed()) {
        ++realizations;
        sum_rate_total += m.report.summary.sum_rate_bps;
      }
  j["realizations"] = realizations;
  j["ues"] = s.n_ues;
  j["served"] = s.n_served;
  j["coverage"] = s.coverage;
  j["median_sinr_db"] = finite_or_null(s.median_sinr_db);
  j["median_rate_bps"] = finite_or_null(s.median_rate_bps);
  j["mean_sum_rate_bps"] = realizations ? sum_rate_total / realizations : 0.0;
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [rank, count] : s.bpl_index_histogram) hist[std::to_string(rank)] = count;
  j["bpl_index_histogram"] = hist;
  j["los_share"] = s.los_share;
  j["nlos_share"] = s.nlos_share;
  j["handover_share"] = s.handover_share;
  j["secondary_bpl_share"] = s.secondary_bpl_share;
  j["intra_inr_positive_share"] = s.intra_inr_positive_share;
  j["inter_inr_positive_share"] = s.inter_inr_positive_share;

  std::vector<double> sinr, inr, snr, rate;
  for (const auto& l : links) {
    sinr.push_back(l.sinr_db);
    inr.push_back(l.inr_db);
    snr.push_back(l.snr_db);
    rate.push_back(l.rate_bps);
  }
  nlohmann::json pct;
  for (const auto& [name, v] : {std::pair{"sinr_db", &sinr}, std::pair{"inr_db", &inr},
                                std::pair{"snr_db", &snr}, std::pair{"rate_bps", &rate}}) {
    nlohmann::json q;
    for (double p : {0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95}) {
      char key[8];
      std::snprintf(key, sizeof key, "p%02d", static_cast<int>(std::lround(p * 100)));
      q[key] = finite_or_null(detail::percentile(*v, p));
    }
    pct[name] = q;
  }
  j["percentiles"] = pct;
  return j;
}

inline nlohmann::json summary_json(const CampaignResult& result) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = config_to_json(result.cfg);
  nlohmann::json modes = nlohmann::json::object();
  for (AllocMode m : result.modes) modes[std::string(mode_name(m))] = mode_summary(result, m);
  j["modes"] = modes;
  nlohmann::json reals = nlohmann::json::array();
  for (const auto& r : result.realizations) {
    nlohmann::json e;
    e["id"] = r.realization_id;
    e["hash"] = detail::hex64(r.hash);
    e["gnbs"] = r.num_gnbs;
    e["ues"] = r.num_ues;
    if (r.failed()) e["error"] = r.error;
    nlohmann::json errors = nlohmann::json::object();
    for (const auto& m : r.modes)
      if (m.failed()) errors[std::string(mode_name(m.mode))] = m.error;
    if (!errors.empty()) e["mode_errors"] = errors;
    reals.push_back(e);
  }
  j["realizations"] = reals;
  j["failures"] = result.failures();
  return j;
}

/// Allocation wall-clock; kept apart from the deterministic outputs.
inline nlohmann::json timing_json(const CampaignResult& result) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  nlohmann::json modes = nlohmann::json::object();
  for (AllocMode m : result.modes) {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& r : result.realizations)
      for (const auto& run : r.modes)
        if (run.mode == m && !run.failed()) v.push_back(run.alloc_seconds);
    modes[std::string(mode_name(m))] = v;
  }
  j["alloc_seconds"] = modes;
  return j;
}

struct EmittedFiles {
  std::filesystem::path records;
  std::filesystem::path summary;
  std::filesystem::path timing;
};

/// Writes records.csv, summary.json and timing.json into `out_dir`.
inline EmittedFiles emit(const CampaignResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  EmittedFiles files{out_dir / "records.csv", out_dir / "summary.json", out_dir / "timing.json"};
  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
  };
  {
    auto f = open(files.records);
    write_records(f, result);
  }
  {
    auto f = open(files.summary);
    f << summary_json(result).dump(2) << '\n';
  }
  {
    auto f = open(files.timing);
    f << timing_json(result).dump(2) << '\n';
  }
  return files;
}

}  // namespace hbf
