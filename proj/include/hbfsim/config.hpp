// SPDX-License-Identifier: Apache-2.0
//
// Global experiment configuration: defaults, validation, JSON documents and
// `key=value` overrides.

#pragma once

#include "hbfsim/common.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>

namespace hbf {

/// Bit count or monitored-link cap that may be unbounded. `std::nullopt`
/// stands for the infinite sentinel.
using Unbounded = std::optional<int>;

enum class SweepFilter {
  kMutualBest,  ///< keep beam pairs that are each other's best response
  kAllPairs,    ///< keep every beam pair above the detection floor
};

enum class UeOrder {
  kBestRsrp,  ///< strongest initial-access RSRP first
  kIndex,     ///< deployment order
};

struct NetworkConfig {
  // Deployment
  double area_side_m = 500.0;
  double gnb_density = 64.0;   // per km^2
  double ue_density = 1000.0;  // per km^2
  double gnb_height_m = 6.0;
  double ue_height_m = 1.5;
  int fixed_ue_count = 0;  // > 0 replaces the PPP draw with an exact count
  bool gnb_random_rotation = false;
  bool ue_random_orientation = true;

  // Radio
  double carrier_hz = 28e9;
  double bandwidth_hz = 400e6;
  double p_max_dbm = 30.0;
  double noise_dbm = -78.0;

  // Antennas
  int n_t = 256;
  int n_r = 16;
  int n_sec = kNumSectors;
  int n_rf_gnb_sec = 4;
  int n_rf_ue = 1;
  double d_over_lambda = 0.5;

  // Codebooks and CSI
  int n_q_sweep_bits = 4;
  Unbounded n_q_csi_bits = std::nullopt;
  Unbounded n_csi_rs = std::nullopt;
  bool enforce_ssb_limit = true;
  double detection_floor_db = -10.0;  // RSRP / noise
  SweepFilter sweep_filter = SweepFilter::kMutualBest;

  // Propagation environment
  int n_scatterers = 50;
  double scatterer_max_height_m = 10.0;
  double los_block_distance_m = 200.0;
  double reflection_loss_db = 13.0;
  std::string trace_file;  // non-empty: replay paths instead of synthesizing

  // Link adaptation
  double sinr_min_db = -5.0;
  double sinr_max_db = 20.05;
  double r_max_bps = 2e9;
  double alpha_loss = 0.75;

  // Allocation
  UeOrder ue_order = UeOrder::kBestRsrp;
  int tdma_slot_draws = 10;

  // Campaign
  std::uint64_t seed = 1;
  int n_realizations = 20;

  double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
  double p_max_w() const { return dbm_to_watt(p_max_dbm); }
  double noise_w() const { return dbm_to_watt(noise_dbm); }
  int n_rf_gnb() const { return n_sec * n_rf_gnb_sec; }
  double area_km2() const { return area_side_m * area_side_m * 1e-6; }
};

/// Table II values with the 256-element gNB panel and ideal CSI.
inline NetworkConfig full_scale_defaults() { return NetworkConfig{}; }

/// Small profile sized for quick paired campaigns: 250 m side, four gNBs,
/// ~62 UEs, 64-element gNB panels.
inline NetworkConfig desk_profile() {
  NetworkConfig cfg;
  cfg.area_side_m = 250.0;
  cfg.n_t = 64;
  return cfg;
}

inline void validate(const NetworkConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(c.area_side_m > 0.0, "area_side_m must be positive");
  require(c.gnb_density > 0.0, "gnb_density must be positive");
  require(c.ue_density >= 0.0, "ue_density must be non-negative");
  require(c.fixed_ue_count >= 0, "fixed_ue_count must be non-negative");
  require(c.gnb_height_m > 0.0 && c.ue_height_m > 0.0, "heights must be positive");
  require(c.carrier_hz > 0.0 && c.bandwidth_hz > 0.0, "carrier and bandwidth must be positive");
  require(c.n_t > 0 && c.n_r > 0, "panel element counts must be positive");
  require(c.n_sec == kNumSectors, "n_sec must be 4");
  require(c.n_rf_gnb_sec > 0 && c.n_rf_ue > 0, "RF chain counts must be positive");
  require(c.d_over_lambda > 0.0, "d_over_lambda must be positive");
  require(c.n_q_sweep_bits >= 1 && c.n_q_sweep_bits <= 12, "n_q_sweep_bits must be in 1..12");
  require(!c.n_q_csi_bits || (*c.n_q_csi_bits >= 1 && *c.n_q_csi_bits <= 16),
          "n_q_csi_bits must be in 1..16 or inf");
  require(!c.n_csi_rs || *c.n_csi_rs >= 1, "n_csi_rs must be >= 1 or inf");
  if (c.enforce_ssb_limit)
    require(c.n_sec * (1 << c.n_q_sweep_bits) <= 64,
            "gNB sweep codebook exceeds 64 SSBs; lower n_q_sweep_bits or unset enforce_ssb_limit");
  require(c.sinr_min_db < c.sinr_max_db, "sinr_min_db must be below sinr_max_db");
  require(c.r_max_bps > 0.0 && c.alpha_loss > 0.0, "r_max_bps and alpha_loss must be positive");
  require(c.n_scatterers >= 0, "n_scatterers must be non-negative");
  require(c.los_block_distance_m > 0.0, "los_block_distance_m must be positive");
  require(c.reflection_loss_db >= 0.0, "reflection_loss_db must be non-negative");
  require(c.tdma_slot_draws > 0, "tdma_slot_draws must be positive");
  require(c.n_realizations > 0, "n_realizations must be positive");
}

// ---------------------------------------------------------------------------
// Structured-text documents

namespace detail {

inline Unbounded parse_unbounded(const nlohmann::json& v, const std::string& key) {
  if (v.is_null()) return std::nullopt;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "Inf" || s == "INF") return std::nullopt;
    try {
      std::size_t pos = 0;
      const int n = std::stoi(s, &pos);
      if (pos == s.size()) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected integer or \"inf\", got \"" + s + "\"");
  }
  if (v.is_number_integer()) return v.get<int>();
  throw ConfigError(key + ": expected integer or \"inf\"");
}

inline nlohmann::json unbounded_to_json(const Unbounded& u) {
  return u ? nlohmann::json(*u) : nlohmann::json("inf");
}

template <typename T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
        throw ConfigError(key + ": expected boolean");
      }
      return v.get<bool>();
    } else if constexpr (std::is_arithmetic_v<T>) {
      if (v.is_string()) {
        const auto s = v.get<std::string>();
        std::size_t pos = 0;
        const double d = std::stod(s, &pos);
        if (pos != s.size()) throw ConfigError(key + ": not a number: " + s);
        return static_cast<T>(d);
      }
      return v.get<T>();
    } else {
      return v.get<T>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(key + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError(key + ": not a number");
  }
}

using FieldSetter = std::function<void(NetworkConfig&, const nlohmann::json&)>;

inline const std::map<std::string, FieldSetter>& field_setters() {
  static const std::map<std::string, FieldSetter> setters = [] {
    std::map<std::string, FieldSetter> m;
#define HBF_FIELD(name)                                                    \
  m[#name] = [](NetworkConfig& c, const nlohmann::json& v) {               \
    c.name = get_as<decltype(NetworkConfig::name)>(v, #name);              \
  }
    HBF_FIELD(area_side_m);
    HBF_FIELD(gnb_density);
    HBF_FIELD(ue_density);
    HBF_FIELD(gnb_height_m);
    HBF_FIELD(ue_height_m);
    HBF_FIELD(fixed_ue_count);
    HBF_FIELD(gnb_random_rotation);
    HBF_FIELD(ue_random_orientation);
    HBF_FIELD(carrier_hz);
    HBF_FIELD(bandwidth_hz);
    HBF_FIELD(p_max_dbm);
    HBF_FIELD(noise_dbm);
    HBF_FIELD(n_t);
    HBF_FIELD(n_r);
    HBF_FIELD(n_sec);
    HBF_FIELD(n_rf_gnb_sec);
    HBF_FIELD(n_rf_ue);
    HBF_FIELD(d_over_lambda);
    HBF_FIELD(n_q_sweep_bits);
    HBF_FIELD(enforce_ssb_limit);
    HBF_FIELD(detection_floor_db);
    HBF_FIELD(n_scatterers);
    HBF_FIELD(scatterer_max_height_m);
    HBF_FIELD(los_block_distance_m);
    HBF_FIELD(reflection_loss_db);
    HBF_FIELD(trace_file);
    HBF_FIELD(sinr_min_db);
    HBF_FIELD(sinr_max_db);
    HBF_FIELD(r_max_bps);
    HBF_FIELD(alpha_loss);
    HBF_FIELD(tdma_slot_draws);
    HBF_FIELD(seed);
    HBF_FIELD(n_realizations);
#undef HBF_FIELD
    m["n_q_csi_bits"] = [](NetworkConfig& c, const nlohmann::json& v) {
      c.n_q_csi_bits = parse_unbounded(v, "n_q_csi_bits");
    };
    m["n_csi_rs"] = [](NetworkConfig& c, const nlohmann::json& v) {
      c.n_csi_rs = parse_unbounded(v, "n_csi_rs");
    };
    m["sweep_filter"] = [](NetworkConfig& c, const nlohmann::json& v) {
      const auto s = get_as<std::string>(v, "sweep_filter");
      if (s == "mutual_best") c.sweep_filter = SweepFilter::kMutualBest;
      else if (s == "all_pairs") c.sweep_filter = SweepFilter::kAllPairs;
      else throw ConfigError("sweep_filter: expected mutual_best or all_pairs");
    };
    m["ue_order"] = [](NetworkConfig& c, const nlohmann::json& v) {
      const auto s = get_as<std::string>(v, "ue_order");
      if (s == "best_rsrp") c.ue_order = UeOrder::kBestRsrp;
      else if (s == "index") c.ue_order = UeOrder::kIndex;
      else throw ConfigError("ue_order: expected best_rsrp or index");
    };
    return m;
  }();
  return setters;
}

}  // namespace detail

inline void apply_field(NetworkConfig& cfg, const std::string& key, const nlohmann::json& value) {
  const auto& setters = detail::field_setters();
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown configuration key: " + key);
  it->second(cfg, value);
}

/// Applies a `key=value` override. The value is read as JSON when it parses,
/// otherwise as a bare string.
inline void apply_override(NetworkConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must be key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  apply_field(cfg, key, value);
}

inline NetworkConfig config_from_json(const nlohmann::json& doc, NetworkConfig base = {}) {
  if (!doc.is_object()) throw ConfigError("configuration document must be an object");
  for (const auto& [key, value] : doc.items()) apply_field(base, key, value);
  validate(base);
  return base;
}

inline NetworkConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false, /*ignore_comments=*/true);
  if (doc.is_discarded()) throw ConfigError("configuration file is not valid JSON: " + path);
  return config_from_json(doc);
}

inline nlohmann::json config_to_json(const NetworkConfig& c) {
  nlohmann::json j;
  j["area_side_m"] = c.area_side_m;
  j["gnb_density"] = c.gnb_density;
  j["ue_density"] = c.ue_density;
  j["gnb_height_m"] = c.gnb_height_m;
  j["ue_height_m"] = c.ue_height_m;
  j["fixed_ue_count"] = c.fixed_ue_count;
  j["gnb_random_rotation"] = c.gnb_random_rotation;
  j["ue_random_orientation"] = c.ue_random_orientation;
  j["carrier_hz"] = c.carrier_hz;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["p_max_dbm"] = c.p_max_dbm;
  j["noise_dbm"] = c.noise_dbm;
  j["n_t"] = c.n_t;
  j["n_r"] = c.n_r;
  j["n_sec"] = c.n_sec;
  j["n_rf_gnb_sec"] = c.n_rf_gnb_sec;
  j["n_rf_ue"] = c.n_rf_ue;
  j["d_over_lambda"] = c.d_over_lambda;
  j["n_q_sweep_bits"] = c.n_q_sweep_bits;
  j["n_q_csi_bits"] = detail::unbounded_to_json(c.n_q_csi_bits);
  j["n_csi_rs"] = detail::unbounded_to_json(c.n_csi_rs);
  j["enforce_ssb_limit"] = c.enforce_ssb_limit;
  j["detection_floor_db"] = c.detection_floor_db;
  j["sweep_filter"] = c.sweep_filter == SweepFilter::kMutualBest ? "mutual_best" : "all_pairs";
  j["n_scatterers"] = c.n_scatterers;
  j["scatterer_max_height_m"] = c.scatterer_max_height_m;
  j["los_block_distance_m"] = c.los_block_distance_m;
  j["reflection_loss_db"] = c.reflection_loss_db;
  j["trace_file"] = c.trace_file;
  j["sinr_min_db"] = c.sinr_min_db;
  j["sinr_max_db"] = c.sinr_max_db;
  j["r_max_bps"] = c.r_max_bps;
  j["alpha_loss"] = c.alpha_loss;
  j["ue_order"] = c.ue_order == UeOrder::kBestRsrp ? "best_rsrp" : "index";
  j["tdma_slot_draws"] = c.tdma_slot_draws;
  j["seed"] = c.seed;
  j["n_realizations"] = c.n_realizations;
  return j;
}

}  // namespace hbf
