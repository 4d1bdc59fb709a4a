// SPDX-License-Identifier: Apache-2.0
//
// Geometric multi-panel channel: propagation paths, a synthetic scatterer
// environment, and assembly of the 4x4 block channel between a UE and a gNB.

#pragma once

#include "hbfsim/common.hpp"
#include "hbfsim/config.hpp"
#include "hbfsim/scenario.hpp"
#include "hbfsim/steering.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

namespace hbf {

/// One LOS or reflected ray. Departure angles are seen from the gNB, arrival
/// angles from the UE, both in the global frame.
struct PropagationPath {
  Complex gain;
  double aod_az_deg = 0.0;
  double aod_el_deg = 0.0;
  double aoa_az_deg = 0.0;
  double aoa_el_deg = 0.0;
  int bounces = 0;
  double path_length_m = 0.0;

  bool is_los() const { return bounces == 0; }
  friend bool operator==(const PropagationPath&, const PropagationPath&) = default;
};

/// Panel sizes and spacing shared by every channel in a run.
struct ArrayGeometry {
  PanelShape gnb_panel;
  PanelShape ue_panel;
  double d_over_lambda = 0.5;

  int n_t() const { return gnb_panel.elements(); }
  int n_r() const { return ue_panel.elements(); }
};

inline ArrayGeometry array_geometry(const NetworkConfig& cfg) {
  return {panel_shape(cfg.n_t), panel_shape(cfg.n_r), cfg.d_over_lambda};
}

/// Half-width of the angular sector a panel serves, both planes.
inline constexpr double kPanelHalfWidthDeg = 45.0;

inline bool within_panel(double local_az_deg, double el_deg) {
  return std::abs(local_az_deg) <= kPanelHalfWidthDeg && std::abs(el_deg) <= kPanelHalfWidthDeg;
}

/// One UE-panel x gNB-panel block, kept in factored form
/// H = A_r diag(coeffs) A_t^H with one column per path that survives gating.
struct ChannelBlock {
  CMatrix rx_steering;    // N_r x K
  CMatrix tx_steering;    // N_t x K
  CVector coeffs;         // sqrt(N_r N_t / K) * alpha_k
  std::vector<int> path_index;  // into MultiPanelChannel::exact_paths

  int num_paths() const { return static_cast<int>(coeffs.size()); }
  bool empty() const { return coeffs.size() == 0; }

  CMatrix dense(int n_r, int n_t) const {
    if (empty()) return CMatrix::Zero(n_r, n_t);
    return rx_steering * coeffs.asDiagonal() * tx_steering.adjoint();
  }
};

struct MultiPanelChannel {
  int n_r = 0;
  int n_t = 0;
  std::array<ChannelBlock, kNumSectors * kNumSectors> blocks;
  std::vector<PropagationPath> exact_paths;

  const ChannelBlock& block(int ue_panel, int gnb_panel) const {
    return blocks[ue_panel * kNumSectors + gnb_panel];
  }
  ChannelBlock& block(int ue_panel, int gnb_panel) {
    return blocks[ue_panel * kNumSectors + gnb_panel];
  }

  CMatrix block_matrix(int ue_panel, int gnb_panel) const {
    return block(ue_panel, gnb_panel).dense(n_r, n_t);
  }

  /// Full (4 N_r) x (4 N_t) matrix.
  CMatrix dense() const {
    CMatrix h = CMatrix::Zero(kNumSectors * n_r, kNumSectors * n_t);
    for (int p = 0; p < kNumSectors; ++p)
      for (int q = 0; q < kNumSectors; ++q)
        if (!block(p, q).empty()) h.block(p * n_r, q * n_t, n_r, n_t) = block_matrix(p, q);
    return h;
  }

  bool is_zero() const {
    for (const auto& b : blocks)
      if (!b.empty()) return false;
    return true;
  }

  bool panel_row_is_zero(int ue_panel) const {
    for (int q = 0; q < kNumSectors; ++q)
      if (!block(ue_panel, q).empty()) return false;
    return true;
  }

  /// w^H [H_{p,1} ... H_{p,4}] for a combiner living on UE panel `ue_panel`;
  /// length 4 N_t.
  CRowVector combine(int ue_panel, const CVector& w) const {
    CRowVector row = CRowVector::Zero(kNumSectors * n_t);
    for (int q = 0; q < kNumSectors; ++q) {
      const ChannelBlock& b = block(ue_panel, q);
      if (b.empty()) continue;
      CRowVector proj = w.adjoint() * b.rx_steering;
      proj = proj.cwiseProduct(b.coeffs.transpose());
      row.segment(q * n_t, n_t) = proj * b.tx_steering.adjoint();
    }
    return row;
  }

  /// w_c^H H w_p for panel-local combiner and precoder weights.
  Complex response(int ue_panel, const CVector& wc, int gnb_panel, const CVector& wp) const {
    const ChannelBlock& b = block(ue_panel, gnb_panel);
    if (b.empty()) return {0.0, 0.0};
    const CRowVector left = wc.adjoint() * b.rx_steering;
    const CVector right = b.tx_steering.adjoint() * wp;
    Complex acc{0.0, 0.0};
    for (int k = 0; k < b.num_paths(); ++k) acc += left(k) * b.coeffs(k) * right(k);
    return acc;
  }

  /// Index into exact_paths of the path contributing most power to
  /// w_c^H H w_p, or nullopt when the block is empty.
  std::optional<int> dominant_path(int ue_panel, const CVector& wc, int gnb_panel,
                                   const CVector& wp) const {
    const ChannelBlock& b = block(ue_panel, gnb_panel);
    if (b.empty()) return std::nullopt;
    const CRowVector left = wc.adjoint() * b.rx_steering;
    const CVector right = b.tx_steering.adjoint() * wp;
    int best = 0;
    double best_power = -1.0;
    for (int k = 0; k < b.num_paths(); ++k) {
      const double pw = std::norm(left(k) * b.coeffs(k) * right(k));
      if (pw > best_power) {
        best_power = pw;
        best = k;
      }
    }
    return b.path_index[best];
  }
};

/// Builds the block channel. Each path enters block (p, q) only if it falls
/// inside both panels' +-45 deg sectors; each block is normalized by the
/// number of paths it actually holds.
inline MultiPanelChannel assemble_channel(const std::vector<PropagationPath>& paths,
                                          const ArrayGeometry& geo,
                                          const PanelOrientation& gnb_orient,
                                          const PanelOrientation& ue_orient) {
  MultiPanelChannel h;
  h.n_r = geo.n_r();
  h.n_t = geo.n_t();
  h.exact_paths = paths;

  std::array<std::vector<int>, kNumSectors> at_ue;
  std::array<std::vector<int>, kNumSectors> at_gnb;
  for (int k = 0; k < static_cast<int>(paths.size()); ++k) {
    const auto& path = paths[k];
    for (int p = 0; p < kNumSectors; ++p)
      if (within_panel(wrap_azimuth(path.aoa_az_deg - ue_orient[p]), path.aoa_el_deg))
        at_ue[p].push_back(k);
    for (int q = 0; q < kNumSectors; ++q)
      if (within_panel(wrap_azimuth(path.aod_az_deg - gnb_orient[q]), path.aod_el_deg))
        at_gnb[q].push_back(k);
  }

  const double array_gain = static_cast<double>(h.n_r) * h.n_t;
  for (int p = 0; p < kNumSectors; ++p) {
    for (int q = 0; q < kNumSectors; ++q) {
      std::vector<int> members;
      for (int k : at_ue[p])
        if (std::find(at_gnb[q].begin(), at_gnb[q].end(), k) != at_gnb[q].end())
          members.push_back(k);
      if (members.empty()) continue;

      const int kb = static_cast<int>(members.size());
      const double scale = std::sqrt(array_gain / kb);
      ChannelBlock& b = h.block(p, q);
      b.rx_steering.resize(h.n_r, kb);
      b.tx_steering.resize(h.n_t, kb);
      b.coeffs.resize(kb);
      b.path_index = members;
      for (int i = 0; i < kb; ++i) {
        const auto& path = paths[members[i]];
        b.rx_steering.col(i) = ura_steering(geo.ue_panel, geo.d_over_lambda,
                                            wrap_azimuth(path.aoa_az_deg - ue_orient[p]),
                                            path.aoa_el_deg);
        b.tx_steering.col(i) = ura_steering(geo.gnb_panel, geo.d_over_lambda,
                                            wrap_azimuth(path.aod_az_deg - gnb_orient[q]),
                                            path.aod_el_deg);
        b.coeffs(i) = scale * path.gain;
      }
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Synthetic propagation

/// Free-space amplitude with a fixed loss per reflection; phase follows the
/// total travelled distance.
inline Complex path_gain(double length_m, int bounces, double wavelength_m,
                         double reflection_loss_db) {
  const double amplitude = wavelength_m / (4.0 * std::numbers::pi * length_m) *
                           std::pow(10.0, -reflection_loss_db * bounces / 20.0);
  const double cycles = std::fmod(length_m / wavelength_m, 1.0);
  return std::polar(amplitude, -2.0 * std::numbers::pi * cycles);
}

/// Direct path from `tx` to `rx`, or a single reflection through `via`.
inline PropagationPath trace_path(const Point3& tx, const Point3& rx,
                                  const std::optional<Point3>& via, double wavelength_m,
                                  double reflection_loss_db) {
  PropagationPath path;
  const Point3 first_hop = via.value_or(rx);
  const Point3 last_hop = via.value_or(tx);
  const Direction dep = direction(tx, first_hop);
  const Direction arr = direction(rx, last_hop);
  path.aod_az_deg = dep.az_deg;
  path.aod_el_deg = dep.el_deg;
  path.aoa_az_deg = arr.az_deg;
  path.aoa_el_deg = arr.el_deg;
  path.bounces = via ? 1 : 0;
  path.path_length_m = via ? distance(tx, *via) + distance(*via, rx) : distance(tx, rx);
  path.gain = path_gain(path.path_length_m, path.bounces, wavelength_m, reflection_loss_db);
  return path;
}

/// Scatterer points shared by every gNB-UE pair of one realization. Each
/// scatterer is visible within a random radius drawn once, so nearby
/// endpoints see the same scatterers.
struct PropagationEnvironment {
  std::vector<Point3> scatterers;
  std::vector<double> visibility_radius_m;
  std::vector<std::vector<char>> gnb_sees;  // [gnb][scatterer]
  std::vector<std::vector<char>> ue_sees;   // [ue][scatterer]
};

/// Probability that a link of length `d` is unobstructed.
inline double visibility_probability(double d, double block_distance_m) {
  return std::exp(-d / block_distance_m);
}

/// Radii are exponential with mean `los_block_distance_m`, which gives every
/// endpoint the same marginal visibility probability exp(-d / d_blk).
inline PropagationEnvironment generate_environment(const Deployment& dep,
                                                   const NetworkConfig& cfg) {
  Rng rng = make_rng(cfg.seed, dep.realization_id, 0xE2F1120Eu);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> radius(1.0 / cfg.los_block_distance_m);
  PropagationEnvironment env;
  env.scatterers.reserve(cfg.n_scatterers);
  for (int s = 0; s < cfg.n_scatterers; ++s) {
    const double x = unit(rng) * cfg.area_side_m;
    const double y = unit(rng) * cfg.area_side_m;
    const double z = unit(rng) * cfg.scatterer_max_height_m;
    env.scatterers.push_back({x, y, z});
    env.visibility_radius_m.push_back(radius(rng));
  }
  auto sees = [&](const Point3& endpoint) {
    std::vector<char> v(env.scatterers.size());
    for (std::size_t s = 0; s < env.scatterers.size(); ++s)
      v[s] = distance(endpoint, env.scatterers[s]) <= env.visibility_radius_m[s];
    return v;
  };
  for (const auto& g : dep.gnb_positions) env.gnb_sees.push_back(sees(g));
  for (const auto& u : dep.ue_positions) env.ue_sees.push_back(sees(u));
  return env;
}

/// LOS path (kept with distance-decaying probability) plus one reflection per
/// scatterer visible from both ends.
inline std::vector<PropagationPath> synthesize_paths(const PropagationEnvironment& env,
                                                     const Deployment& dep, GnbId gnb, UeId ue,
                                                     const NetworkConfig& cfg, Rng& rng) {
  if (gnb < 0 || gnb >= dep.num_gnbs() || ue < 0 || ue >= dep.num_ues())
    throw ReferenceError("synthesize_paths: gNB or UE index out of range");
  const Point3& tx = dep.gnb_positions[gnb];
  const Point3& rx = dep.ue_positions[ue];
  const double lambda = cfg.wavelength_m();
  std::vector<PropagationPath> paths;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < visibility_probability(distance(tx, rx), cfg.los_block_distance_m))
    paths.push_back(trace_path(tx, rx, std::nullopt, lambda, cfg.reflection_loss_db));

  for (std::size_t s = 0; s < env.scatterers.size(); ++s) {
    if (!env.gnb_sees[gnb][s] || !env.ue_sees[ue][s]) continue;
    paths.push_back(trace_path(tx, rx, env.scatterers[s], lambda, cfg.reflection_loss_db));
  }
  return paths;
}

/// RNG stream dedicated to one gNB-UE pair of one realization.
inline Rng pair_rng(const NetworkConfig& cfg, int realization_id, GnbId gnb, UeId ue) {
  return make_rng(cfg.seed, realization_id, gnb, ue, 0xFA1C0DEu);
}

}  // namespace hbf
