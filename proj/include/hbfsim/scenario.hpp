// SPDX-License-Identifier: Apache-2.0
//
// Network deployments: gNBs on a regular grid, UEs from a Poisson point
// process, four sector panels per node.

#pragma once

#include "hbfsim/common.hpp"
#include "hbfsim/config.hpp"

#include <array>
#include <vector>

namespace hbf {

/// Boresight azimuths (deg, global frame) of the four sector panels.
using PanelOrientation = std::array<double, kNumSectors>;

inline PanelOrientation panel_orientation(double base_deg) {
  PanelOrientation o{};
  for (int p = 0; p < kNumSectors; ++p) o[p] = wrap_azimuth(base_deg + 90.0 * p);
  return o;
}

struct Deployment {
  std::vector<Point3> gnb_positions;
  std::vector<PanelOrientation> gnb_panel_orientations;
  std::vector<Point3> ue_positions;
  std::vector<PanelOrientation> ue_panel_orientations;
  int realization_id = 0;

  int num_gnbs() const { return static_cast<int>(gnb_positions.size()); }
  int num_ues() const { return static_cast<int>(ue_positions.size()); }
};

/// Number of gNBs implied by the density over the configured area.
inline int gnb_count(const NetworkConfig& cfg) {
  return static_cast<int>(std::lround(cfg.gnb_density * cfg.area_km2()));
}

inline Deployment generate_deployment(const NetworkConfig& cfg, int realization_id) {
  if (!(cfg.area_side_m > 0.0)) throw ConfigError("deployment area must be positive");
  if (!(cfg.gnb_density > 0.0)) throw ConfigError("gNB density must be positive");
  const int n_gnb = gnb_count(cfg);
  if (n_gnb <= 0) throw ConfigError("gNB density rounds to zero gNBs over the configured area");

  Rng rng = make_rng(cfg.seed, realization_id, 0x5CE7A410u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> azimuth(-180.0, 180.0);

  Deployment dep;
  dep.realization_id = realization_id;

  const int cols = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_gnb)))));
  const int rows = (n_gnb + cols - 1) / cols;
  const double cell_x = cfg.area_side_m / cols;
  const double cell_y = cfg.area_side_m / rows;
  for (int k = 0; k < n_gnb; ++k) {
    const int r = k / cols;
    const int c = k % cols;
    dep.gnb_positions.push_back({(c + 0.5) * cell_x, (r + 0.5) * cell_y, cfg.gnb_height_m});
    const double base = cfg.gnb_random_rotation ? azimuth(rng) : 0.0;
    dep.gnb_panel_orientations.push_back(panel_orientation(base));
  }

  int n_ue = cfg.fixed_ue_count;
  if (n_ue == 0 && cfg.ue_density > 0.0) {
    std::poisson_distribution<int> count(cfg.ue_density * cfg.area_km2());
    n_ue = count(rng);
  }
  dep.ue_positions.reserve(n_ue);
  for (int u = 0; u < n_ue; ++u) {
    const double x = unit(rng) * cfg.area_side_m;
    const double y = unit(rng) * cfg.area_side_m;
    dep.ue_positions.push_back({x, y, cfg.ue_height_m});
    const double base = cfg.ue_random_orientation ? azimuth(rng) : 0.0;
    dep.ue_panel_orientations.push_back(panel_orientation(base));
  }
  return dep;
}

}  // namespace hbf
