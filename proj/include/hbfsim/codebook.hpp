// SPDX-License-Identifier: Apache-2.0
//
// Sector sweep codebooks, their union over the four panels, and the angular
// grid that bounds channel-estimation resolution.

#pragma once

#include "hbfsim/common.hpp"
#include "hbfsim/config.hpp"
#include "hbfsim/scenario.hpp"
#include "hbfsim/steering.hpp"

#include <algorithm>
#include <array>
#include <memory>
#include <tuple>
#include <utility>
#include <vector>

namespace hbf {

struct SectorBeam {
  BeamId beam_id = 0;
  double steer_az_deg = 0.0;
  CVector weights;
};

/// 2^n_q steered beams evenly covering (-45, +45) deg around boresight.
struct SectorCodebook {
  int n_q = 0;
  PanelShape shape;
  std::vector<SectorBeam> entries;
  CMatrix weight_matrix;  // N x 2^n_q, column i = entries[i].weights

  int size() const { return static_cast<int>(entries.size()); }
  int elements() const { return shape.elements(); }
};

inline SectorCodebook build_sector_codebook(int n_q, const PanelShape& shape,
                                            double d_over_lambda = 0.5) {
  if (n_q < 1) throw ContractViolation("build_sector_codebook: n_q must be >= 1");
  const int count = 1 << n_q;
  const double spacing = 2.0 * kPanelHalfWidthDeg / count;
  SectorCodebook book;
  book.n_q = n_q;
  book.shape = shape;
  book.weight_matrix.resize(shape.elements(), count);
  for (int i = 0; i < count; ++i) {
    SectorBeam beam;
    beam.beam_id = i;
    beam.steer_az_deg = -kPanelHalfWidthDeg + (i + 0.5) * spacing;
    beam.weights = ura_steering(shape, d_over_lambda, beam.steer_az_deg, 0.0);
    book.weight_matrix.col(i) = beam.weights;
    book.entries.push_back(std::move(beam));
  }
  return book;
}

inline SectorCodebook build_sector_codebook(int n_q, int n_elements, double d_over_lambda = 0.5) {
  return build_sector_codebook(n_q, panel_shape(n_elements), d_over_lambda);
}

/// Union of the four panel codebooks of one node. Global beam id
/// = panel * (beams per panel) + local index.
class FullCodebook {
 public:
  struct GlobalBeam {
    BeamId id;
    int panel;
    int local_index;
    double local_az_deg;
    double global_az_deg;
  };

  FullCodebook() = default;

  FullCodebook(std::array<std::shared_ptr<const SectorCodebook>, kNumSectors> books,
               const PanelOrientation& orientation)
      : books_(std::move(books)), orientation_(orientation) {
    for (const auto& b : books_)
      if (!b) throw ContractViolation("full_codebook: missing sector codebook");
    per_panel_ = books_[0]->size();
    elements_ = books_[0]->elements();
    for (const auto& b : books_)
      if (b->size() != per_panel_ || b->elements() != elements_)
        throw ContractViolation("full_codebook: sector codebooks must have equal size");
  }

  int size() const { return kNumSectors * per_panel_; }
  int per_panel() const { return per_panel_; }
  int elements_per_panel() const { return elements_; }
  const PanelOrientation& orientation() const { return orientation_; }
  const SectorCodebook& sector(int panel) const { return *books_[panel]; }

  int panel_of(BeamId id) const { return id / per_panel_; }

  GlobalBeam beam(BeamId id) const {
    if (id < 0 || id >= size()) throw ContractViolation("beam id out of range");
    const int panel = id / per_panel_;
    const int local = id % per_panel_;
    const double local_az = books_[panel]->entries[local].steer_az_deg;
    return {id, panel, local, local_az, wrap_azimuth(orientation_[panel] + local_az)};
  }

  /// Weights on the beam's own panel (length N).
  const CVector& panel_weights(BeamId id) const {
    return books_[id / per_panel_]->entries[id % per_panel_].weights;
  }

  /// Full-array weight vector: panel weights in that panel's slice, zeros
  /// elsewhere (length 4 N).
  CVector embed(BeamId id) const {
    CVector w = CVector::Zero(kNumSectors * elements_);
    w.segment(panel_of(id) * elements_, elements_) = panel_weights(id);
    return w;
  }

 private:
  std::array<std::shared_ptr<const SectorCodebook>, kNumSectors> books_{};
  PanelOrientation orientation_{};
  int per_panel_ = 0;
  int elements_ = 0;
};

inline FullCodebook full_codebook(std::array<std::shared_ptr<const SectorCodebook>, kNumSectors> books,
                                  const PanelOrientation& orientation) {
  return FullCodebook(std::move(books), orientation);
}

/// Same sector codebook replicated on all four panels.
inline FullCodebook full_codebook(const std::shared_ptr<const SectorCodebook>& book,
                                  const PanelOrientation& orientation) {
  return FullCodebook({book, book, book, book}, orientation);
}

// ---------------------------------------------------------------------------
// Estimation grid

/// Azimuth / elevation step of an n_q-bit estimation codebook over 4 panels.
inline std::pair<double, double> resolution(Unbounded n_q) {
  if (!n_q) throw ContractViolation("resolution is undefined for an infinite codebook");
  if (*n_q < 1) throw ContractViolation("resolution: n_q must be >= 1");
  const double az = 360.0 / (kNumSectors * std::ldexp(1.0, *n_q));
  const double el = 180.0 / (kNumSectors * std::ldexp(1.0, *n_q - 1));
  return {az, el};
}

/// Angular lattice for quantized channel estimates. Azimuth points sit at
/// anchor + (m + 1/2) * step, elevation points at (m + 1/2) * step. An
/// unbounded n_q means exact angles.
struct EstimationGrid {
  Unbounded n_q;
  double az_step_deg = 0.0;
  double el_step_deg = 0.0;
  double az_anchor_deg = 0.0;

  bool exact() const { return !n_q.has_value(); }
};

inline EstimationGrid estimation_grid(Unbounded n_q, double az_anchor_deg = 0.0) {
  EstimationGrid g;
  g.n_q = n_q;
  g.az_anchor_deg = az_anchor_deg;
  if (n_q) std::tie(g.az_step_deg, g.el_step_deg) = resolution(n_q);
  return g;
}

namespace detail {
/// Nearest point of {offset + (m + 1/2) step}; exact midpoints go to the
/// lower point.
inline double snap_to_lattice(double rel, double step) {
  const double t = rel / step - 0.5;
  const double m = std::ceil(t - 0.5);
  return (m + 0.5) * step;
}
}  // namespace detail

inline double snap_azimuth(const EstimationGrid& g, double az_deg) {
  if (g.exact()) return az_deg;
  const double rel = wrap_azimuth(az_deg - g.az_anchor_deg);
  return wrap_azimuth(g.az_anchor_deg + detail::snap_to_lattice(rel, g.az_step_deg));
}

inline double snap_elevation(const EstimationGrid& g, double el_deg) {
  if (g.exact()) return el_deg;
  const double half = 90.0 - g.el_step_deg / 2.0;
  return std::clamp(detail::snap_to_lattice(el_deg, g.el_step_deg), -half, half);
}

}  // namespace hbf
