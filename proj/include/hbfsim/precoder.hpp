// SPDX-License-Identifier: Apache-2.0
//
// Two-stage hybrid precoding (codebook RF stage + zero-forcing baseband) and
// the fully digital zero-forcing reference.

#pragma once

#include "hbfsim/beamsweep.hpp"
#include "hbfsim/codebook.hpp"
#include "hbfsim/csi.hpp"

#include <span>
#include <vector>

namespace hbf {

/// Largest tolerated singular-value spread of the aggregate effective channel.
inline constexpr double kMaxConditionNumber = 1e12;

enum class Precoding { kHybrid, kDigital, kAnalog };

struct GnbPrecoderState {
  GnbId gnb = -1;
  std::vector<UeId> served;
  CMatrix w_rf;        // 4 N_t x N_u
  CMatrix w_bb;        // N_u x N_u (identity for digital / analog)
  CMatrix w_combined;  // 4 N_t x N_u, unit-norm columns
  double p_per_ue = 0.0;

  int num_served() const { return static_cast<int>(served.size()); }
  int column_of(UeId ue) const {
    for (int i = 0; i < num_served(); ++i)
      if (served[i] == ue) return i;
    return -1;
  }
};

/// Column i is the full-array embedding of UE i's serving gNB beam.
inline CMatrix rf_stage(std::span<const BeamPairLink> serving, const FullCodebook& gnb_book,
                        int n_rf_per_panel, int n_rf_total) {
  if (static_cast<int>(serving.size()) > n_rf_total)
    throw CapacityError("more served UEs than gNB RF chains");
  std::array<int, kNumSectors> per_panel{};
  CMatrix w(kNumSectors * gnb_book.elements_per_panel(), static_cast<Eigen::Index>(serving.size()));
  for (std::size_t i = 0; i < serving.size(); ++i) {
    if (serving[i].gnb != serving[0].gnb)
      throw ContractViolation("rf_stage: all links must terminate on one gNB");
    const int panel = gnb_book.panel_of(serving[i].gnb_beam);
    if (++per_panel[panel] > n_rf_per_panel)
      throw CapacityError("panel " + std::to_string(panel) + " RF chains exhausted");
    w.col(static_cast<Eigen::Index>(i)) = gnb_book.embed(serving[i].gnb_beam);
  }
  return w;
}

/// Right pseudo-inverse of the aggregate effective channel (rows = UEs), so
/// that aggregate * W = I. Throws RankDeficiencyError past the condition cap.
inline CMatrix zero_forcing(const CMatrix& aggregate, const std::vector<UeId>& ues = {}) {
  if (aggregate.rows() == 0) return CMatrix(aggregate.cols(), 0);
  if (aggregate.rows() > aggregate.cols())
    throw RankDeficiencyError(ues, std::numeric_limits<double>::infinity());
  Eigen::JacobiSVD<CMatrix> svd(aggregate, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smax > 0.0) || !(cond <= kMaxConditionNumber)) throw RankDeficiencyError(ues, cond);
  return svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
}

/// Scales baseband column i by 1 / ||W_RF w_BB,i||.
inline CMatrix normalize_baseband(const CMatrix& w_rf, CMatrix w_bb) {
  for (Eigen::Index i = 0; i < w_bb.cols(); ++i) {
    const double n = (w_rf * w_bb.col(i)).norm();
    if (n > 0.0) w_bb.col(i) /= n;
  }
  return w_bb;
}

inline CMatrix aggregate_rows(std::span<const EffectiveChannel> rows) {
  if (rows.empty()) return CMatrix(0, 0);
  CMatrix h(static_cast<Eigen::Index>(rows.size()), rows.front().row.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].row.size() != h.cols())
      throw ContractViolation("zf_stage: effective rows differ in length");
    h.row(static_cast<Eigen::Index>(i)) = rows[i].row;
  }
  return h;
}

/// Zero-forcing baseband precoder with per-UE power normalization against
/// the RF stage.
inline CMatrix zf_stage(std::span<const EffectiveChannel> rows, const CMatrix& w_rf) {
  std::vector<UeId> ues;
  for (const auto& r : rows) ues.push_back(r.ue);
  const CMatrix h = aggregate_rows(rows);
  if (h.cols() != w_rf.cols()) throw ContractViolation("zf_stage: rows must have N_u entries");
  return normalize_baseband(w_rf, zero_forcing(h, ues));
}

inline CMatrix compose(const CMatrix& w_rf, const CMatrix& w_bb) {
  if (w_rf.cols() != w_bb.rows()) throw ContractViolation("compose: shape mismatch");
  return w_rf * w_bb;
}

/// Fully digital ZF: `rows` holds w_c,i^H H_i (N_u x 4 N_t); columns of the
/// result are unit-norm.
inline CMatrix dbf_precoder(const CMatrix& rows, const std::vector<UeId>& ues = {}) {
  CMatrix w = zero_forcing(rows, ues);
  for (Eigen::Index i = 0; i < w.cols(); ++i) {
    const double n = w.col(i).norm();
    if (n > 0.0) w.col(i) /= n;
  }
  return w;
}

}  // namespace hbf
