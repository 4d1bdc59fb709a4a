// SPDX-License-Identifier: Apache-2.0
//
// Exhaustive SSB beam sweep of initial access and the strongest-link
// association it yields.

#pragma once

#include "hbfsim/channel.hpp"
#include "hbfsim/codebook.hpp"

#include <algorithm>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

namespace hbf {

/// A (UE, gNB, gNB beam, UE beam) link as measured during the sweep.
struct BeamPairLink {
  UeId ue = -1;
  GnbId gnb = -1;
  BeamId gnb_beam = -1;
  BeamId ue_beam = -1;
  double rsrp = 0.0;  // W
  bool is_los = false;
  int candidate_rank = 0;  // 1 = strongest at this UE

  friend bool operator==(const BeamPairLink&, const BeamPairLink&) = default;
};

struct SweepOptions {
  double p_ssb_w = 1.0;
  double floor_w = 0.0;  // minimum RSRP kept
  SweepFilter filter = SweepFilter::kMutualBest;
};

inline SweepOptions sweep_options(const NetworkConfig& cfg) {
  return {cfg.p_max_w(), cfg.noise_w() * db_to_linear(cfg.detection_floor_db), cfg.sweep_filter};
}

/// Orders by descending RSRP, ties by (gNB, gNB beam, UE beam).
inline bool stronger_link(const BeamPairLink& a, const BeamPairLink& b) {
  if (a.rsrp != b.rsrp) return a.rsrp > b.rsrp;
  return std::tie(a.gnb, a.gnb_beam, a.ue_beam) < std::tie(b.gnb, b.gnb_beam, b.ue_beam);
}

/// RSRP of every (UE beam, gNB beam) pair towards one gNB; rows are UE beams.
inline Eigen::MatrixXd rsrp_grid(const MultiPanelChannel& h, const FullCodebook& gnb_book,
                                 const FullCodebook& ue_book, double p_ssb_w) {
  const int su = ue_book.per_panel();
  const int sg = gnb_book.per_panel();
  Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(ue_book.size(), gnb_book.size());
  for (int p = 0; p < kNumSectors; ++p) {
    for (int q = 0; q < kNumSectors; ++q) {
      const ChannelBlock& b = h.block(p, q);
      if (b.empty()) continue;
      const CMatrix left = ue_book.sector(p).weight_matrix.adjoint() * b.rx_steering;
      const CMatrix right = b.tx_steering.adjoint() * gnb_book.sector(q).weight_matrix;
      const CMatrix m = left * b.coeffs.asDiagonal() * right;
      grid.block(p * su, q * sg, su, sg) = p_ssb_w * m.cwiseAbs2();
    }
  }
  return grid;
}

/// Sweeps every gNB beam against every UE beam. `channels[g]` may be null
/// when no channel to gNB g exists. Returned links are sorted strongest first
/// with ranks assigned.
inline std::vector<BeamPairLink> sweep(UeId ue, std::span<const MultiPanelChannel* const> channels,
                                       std::span<const FullCodebook> gnb_books,
                                       const FullCodebook& ue_book, const SweepOptions& opt) {
  if (channels.size() != gnb_books.size())
    throw ContractViolation("sweep: one codebook per gNB required");
  std::vector<BeamPairLink> out;
  for (std::size_t g = 0; g < channels.size(); ++g) {
    const MultiPanelChannel* h = channels[g];
    if (h == nullptr || h->is_zero()) continue;
    const FullCodebook& gnb_book = gnb_books[g];
    const Eigen::MatrixXd grid = rsrp_grid(*h, gnb_book, ue_book, opt.p_ssb_w);

    auto keep = [&](int u, int b) {
      const double r = grid(u, b);
      if (!(r > 0.0) || r < opt.floor_w) return;
      BeamPairLink l;
      l.ue = ue;
      l.gnb = static_cast<GnbId>(g);
      l.gnb_beam = b;
      l.ue_beam = u;
      l.rsrp = r;
      const int up = ue_book.panel_of(u);
      const int gp = gnb_book.panel_of(b);
      const auto dom = h->dominant_path(up, ue_book.panel_weights(u), gp, gnb_book.panel_weights(b));
      l.is_los = dom && h->exact_paths[*dom].is_los();
      out.push_back(l);
    };

    if (opt.filter == SweepFilter::kAllPairs) {
      for (int u = 0; u < grid.rows(); ++u)
        for (int b = 0; b < grid.cols(); ++b) keep(u, b);
    } else {
      // Strict-first argmax so ties resolve to the lowest beam id.
      std::vector<int> best_gnb_for_ue(grid.rows());
      std::vector<int> best_ue_for_gnb(grid.cols());
      for (int u = 0; u < grid.rows(); ++u) grid.row(u).maxCoeff(&best_gnb_for_ue[u]);
      for (int b = 0; b < grid.cols(); ++b) grid.col(b).maxCoeff(&best_ue_for_gnb[b]);
      for (int u = 0; u < grid.rows(); ++u) {
        const int b = best_gnb_for_ue[u];
        if (best_ue_for_gnb[b] == u) keep(u, b);
      }
    }
  }
  std::sort(out.begin(), out.end(), stronger_link);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].candidate_rank = static_cast<int>(i) + 1;
  return out;
}

/// The strongest candidate, or nullopt when the UE detected nothing.
inline std::optional<BeamPairLink> initial_association(std::span<const BeamPairLink> candidates) {
  if (candidates.empty()) return std::nullopt;
  return *std::min_element(candidates.begin(), candidates.end(), stronger_link);
}

/// Wall time of one full sweep: the UE holds each of its beams for one SS
/// burst period.
inline double sweep_duration_ms(int ue_codebook_size, double ss_period_ms = 20.0) {
  return ue_codebook_size * ss_period_ms;
}

}  // namespace hbf
