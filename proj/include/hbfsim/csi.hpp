// SPDX-License-Identifier: Apache-2.0
//
// Quantized channel estimates and per-UE effective channels.

#pragma once

#include "hbfsim/channel.hpp"
#include "hbfsim/codebook.hpp"

#include <vector>

namespace hbf {

struct QuantizedPath {
  Complex gain;
  double q_aod_az = 0.0;
  double q_aod_el = 0.0;
  double q_aoa_az = 0.0;
  double q_aoa_el = 0.0;
  int bounces = 0;             // fewest bounces among merged paths
  double path_length_m = 0.0;  // of the first merged path

  bool same_angles(const QuantizedPath& o) const {
    return q_aod_az == o.q_aod_az && q_aod_el == o.q_aod_el && q_aoa_az == o.q_aoa_az &&
           q_aoa_el == o.q_aoa_el;
  }
};

/// Snaps departure angles to `gnb_grid` and arrival angles to `ue_grid`, then
/// merges paths that become indistinguishable by coherently summing their
/// gains. Exact grids pass paths through unchanged.
inline std::vector<QuantizedPath> quantize_paths(const std::vector<PropagationPath>& paths,
                                                 const EstimationGrid& gnb_grid,
                                                 const EstimationGrid& ue_grid) {
  std::vector<QuantizedPath> out;
  out.reserve(paths.size());
  const bool merge = !gnb_grid.exact() || !ue_grid.exact();
  for (const auto& p : paths) {
    QuantizedPath q;
    q.gain = p.gain;
    q.q_aod_az = snap_azimuth(gnb_grid, p.aod_az_deg);
    q.q_aod_el = snap_elevation(gnb_grid, p.aod_el_deg);
    q.q_aoa_az = snap_azimuth(ue_grid, p.aoa_az_deg);
    q.q_aoa_el = snap_elevation(ue_grid, p.aoa_el_deg);
    q.bounces = p.bounces;
    q.path_length_m = p.path_length_m;
    if (merge) {
      auto it = std::find_if(out.begin(), out.end(),
                             [&](const QuantizedPath& e) { return e.same_angles(q); });
      if (it != out.end()) {
        it->gain += q.gain;
        it->bounces = std::min(it->bounces, q.bounces);
        continue;
      }
    }
    out.push_back(q);
  }
  return out;
}

inline std::vector<QuantizedPath> quantize_paths(const std::vector<PropagationPath>& paths,
                                                 const EstimationGrid& grid) {
  return quantize_paths(paths, grid, grid);
}

inline std::vector<PropagationPath> to_paths(const std::vector<QuantizedPath>& quantized) {
  std::vector<PropagationPath> out;
  out.reserve(quantized.size());
  for (const auto& q : quantized) {
    PropagationPath p;
    p.gain = q.gain;
    p.aod_az_deg = q.q_aod_az;
    p.aod_el_deg = q.q_aod_el;
    p.aoa_az_deg = q.q_aoa_az;
    p.aoa_el_deg = q.q_aoa_el;
    p.bounces = q.bounces;
    p.path_length_m = q.path_length_m;
    out.push_back(p);
  }
  return out;
}

/// Block channel rebuilt from quantized paths with the same gating and
/// per-block normalization as the true channel.
inline MultiPanelChannel estimate_channel(const std::vector<QuantizedPath>& quantized,
                                          const ArrayGeometry& geo,
                                          const PanelOrientation& gnb_orient,
                                          const PanelOrientation& ue_orient) {
  return assemble_channel(to_paths(quantized), geo, gnb_orient, ue_orient);
}

struct EffectiveChannel {
  CRowVector row;  // length N_u
  UeId ue = -1;
};

/// w_c^H H_est W_RF for one UE against the RF precoders of its gNB.
inline EffectiveChannel effective_channel(const CVector& ue_combiner, const MultiPanelChannel& est,
                                          const CMatrix& rf_precoders, UeId ue = -1) {
  if (ue_combiner.size() != kNumSectors * est.n_r)
    throw ContractViolation("effective_channel: combiner length must be 4 N_r");
  if (rf_precoders.rows() != kNumSectors * est.n_t)
    throw ContractViolation("effective_channel: precoder rows must be 4 N_t");
  CRowVector combined = CRowVector::Zero(kNumSectors * est.n_t);
  for (int p = 0; p < kNumSectors; ++p) {
    const CVector w = ue_combiner.segment(p * est.n_r, est.n_r);
    if (w.isZero(0.0)) continue;
    combined += est.combine(p, w);
  }
  return {combined * rf_precoders, ue};
}

}  // namespace hbf
