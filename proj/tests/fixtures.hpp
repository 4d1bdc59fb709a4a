// SPDX-License-Identifier: Apache-2.0
//
// Hand-built networks for unit tests: explicit paths between nodes whose
// panels face the axes, small arrays, 3-bit sweep books.

#pragma once

#include "hbfsim/hbfsim.hpp"

#include <vector>

namespace hbf::test {

/// 4x4 gNB panels, 2x2 UE panels, 8 beams per panel, exact CSI, 1 W.
inline NetworkConfig tiny_config() {
  NetworkConfig cfg;
  cfg.area_side_m = 100.0;
  cfg.n_t = 16;
  cfg.n_r = 4;
  cfg.n_q_sweep_bits = 3;
  cfg.p_max_dbm = 30.0;
  cfg.n_realizations = 1;
  return cfg;
}

inline Deployment manual_deployment(int n_gnbs, int n_ues) {
  Deployment dep;
  for (int g = 0; g < n_gnbs; ++g) {
    dep.gnb_positions.push_back({50.0 * g, 0.0, 6.0});
    dep.gnb_panel_orientations.push_back(panel_orientation(0.0));
  }
  for (int u = 0; u < n_ues; ++u) {
    dep.ue_positions.push_back({10.0 + u, 20.0, 1.5});
    dep.ue_panel_orientations.push_back(panel_orientation(0.0));
  }
  return dep;
}

/// Global azimuth of beam `index` on `panel` of an n_q-bit book whose
/// panels face 0/90/180/270 deg.
inline double beam_azimuth(int n_q, int panel, int index) {
  const double spacing = 90.0 / (1 << n_q);
  return wrap_azimuth(90.0 * panel - 45.0 + (index + 0.5) * spacing);
}

inline PropagationPath make_path(double aod_az, double aoa_az, double gain, int bounces = 1) {
  PropagationPath p;
  p.gain = {gain, 0.0};
  p.aod_az_deg = aod_az;
  p.aoa_az_deg = aoa_az;
  p.bounces = bounces;
  p.path_length_m = 50.0;
  return p;
}

}  // namespace hbf::test
