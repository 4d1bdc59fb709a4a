// SPDX-License-Identifier: Apache-2.0
//
// Link metrics: received signal, intra/inter-cell interference, SINR and the
// truncated-Shannon throughput mapping. Everything here is evaluated on
// true channels.

#pragma once

#include "hbfsim/config.hpp"
#include "hbfsim/precoder.hpp"

#include <algorithm>
#include <map>
#include <span>
#include <vector>

namespace hbf {

/// Attenuated, truncated Shannon mapping from SINR to rate.
inline double throughput(double sinr_db, const NetworkConfig& cfg) {
  if (!(sinr_db >= cfg.sinr_min_db)) return 0.0;
  if (sinr_db >= cfg.sinr_max_db) return cfg.r_max_bps;
  return cfg.alpha_loss * cfg.bandwidth_hz * std::log2(1.0 + db_to_linear(sinr_db));
}

struct LinkReport {
  UeId ue = -1;
  GnbId gnb = -1;  // -1 when dropped
  bool served = false;
  double rss_w = 0.0;
  double i_intra_w = 0.0;
  double i_inter_w = 0.0;
  double noise_w = 0.0;
  double sinr_db = -std::numeric_limits<double>::infinity();
  double inr_db = -std::numeric_limits<double>::infinity();
  double intra_inr_db = -std::numeric_limits<double>::infinity();
  double inter_inr_db = -std::numeric_limits<double>::infinity();
  double snr_db = -std::numeric_limits<double>::infinity();
  double rate_bps = 0.0;
  int alloc_rank = 0;
  bool is_los = false;
  bool is_handover = false;
};

/// Fills the derived ratios from the four power terms.
inline void finish_report(LinkReport& r, double rate_divisor, const NetworkConfig& cfg) {
  const double denom = r.i_intra_w + r.i_inter_w + r.noise_w;
  r.sinr_db = linear_to_db(r.rss_w / denom);
  r.snr_db = linear_to_db(r.rss_w / r.noise_w);
  r.inr_db = linear_to_db((r.i_intra_w + r.i_inter_w) / r.noise_w);
  r.intra_inr_db = linear_to_db(r.i_intra_w / r.noise_w);
  r.inter_inr_db = linear_to_db(r.i_inter_w / r.noise_w);
  r.rate_bps = throughput(r.sinr_db, cfg) / rate_divisor;
}

// ---------------------------------------------------------------------------
// Per-link power terms. `row` is w_c^H H over the full gNB array (4 N_t) for
// the UE's combiner and the TRUE channel; an empty row means no channel.

inline double stream_power(const CRowVector& row, const GnbPrecoderState& s, int column) {
  if (row.size() == 0) return 0.0;
  return std::norm(row.dot(s.w_combined.col(column).conjugate()));
}

inline double rss(const CRowVector& row, const GnbPrecoderState& s, int column) {
  return s.p_per_ue * stream_power(row, s, column);
}

/// Power leaking from the co-scheduled streams of the serving gNB, own
/// column excluded.
inline double intra_interference(const CRowVector& row, const GnbPrecoderState& s, int column) {
  if (row.size() == 0) return 0.0;
  const CRowVector proj = row * s.w_combined;
  return s.p_per_ue * (proj.squaredNorm() - std::norm(proj(column)));
}

/// All streams of one gNB as seen through `row`.
inline double total_power(const CRowVector& row, const GnbPrecoderState& s) {
  if (row.size() == 0 || s.served.empty()) return 0.0;
  return s.p_per_ue * (row * s.w_combined).squaredNorm();
}

/// Incoherent sum over every non-serving gNB and each of its streams.
/// `rows[g]` is the UE's combined row towards gNB g.
inline double inter_interference(std::span<const CRowVector* const> rows,
                                 std::span<const GnbPrecoderState> states, GnbId serving) {
  double acc = 0.0;
  for (std::size_t g = 0; g < states.size(); ++g) {
    if (static_cast<GnbId>(g) == serving || rows[g] == nullptr) continue;
    acc += total_power(*rows[g], states[g]);
  }
  return acc;
}

/// Channel-level convenience: combiner `wc` (panel weights) on UE panel `p`.
inline double rss(const MultiPanelChannel& h, int ue_panel, const CVector& wc,
                  const GnbPrecoderState& s, int column) {
  return rss(h.combine(ue_panel, wc), s, column);
}

inline double intra_interference(const MultiPanelChannel& h, int ue_panel, const CVector& wc,
                                 const GnbPrecoderState& s, int column) {
  return intra_interference(h.combine(ue_panel, wc), s, column);
}

// ---------------------------------------------------------------------------
// Network summaries

struct NetworkSummary {
  int n_ues = 0;
  int n_served = 0;
  double coverage = 0.0;  // fraction of deployed UEs with SINR >= SINR_min
  double median_sinr_db = -std::numeric_limits<double>::infinity();
  double median_rate_bps = 0.0;
  double sum_rate_bps = 0.0;
  std::map<int, int> bpl_index_histogram;  // serving candidate rank -> UEs
  double los_share = 0.0;       // among served
  double nlos_share = 0.0;
  double handover_share = 0.0;
  double secondary_bpl_share = 0.0;  // served with rank > 1
  double intra_inr_positive_share = 0.0;  // served with I_intra / N > 1
  double inter_inr_positive_share = 0.0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  const double a = v[n / 2 - 1];
  const double b = v[n / 2];
  if (std::isinf(a) || std::isinf(b)) return a;  // avoid inf - inf
  return 0.5 * (a + b);
}

inline NetworkSummary summarize(std::span<const LinkReport> links, const NetworkConfig& cfg) {
  NetworkSummary s;
  s.n_ues = static_cast<int>(links.size());
  if (links.empty()) return s;
  std::vector<double> sinr, rate;
  int covered = 0, los = 0, handover = 0, secondary = 0, intra_pos = 0, inter_pos = 0;
  for (const auto& l : links) {
    sinr.push_back(l.sinr_db);
    rate.push_back(l.rate_bps);
    s.sum_rate_bps += l.rate_bps;
    if (l.served && l.sinr_db >= cfg.sinr_min_db) ++covered;
    if (!l.served) continue;
    ++s.n_served;
    ++s.bpl_index_histogram[l.alloc_rank];
    los += l.is_los;
    handover += l.is_handover;
    secondary += l.alloc_rank > 1;
    intra_pos += l.intra_inr_db > 0.0;
    inter_pos += l.inter_inr_db > 0.0;
  }
  s.coverage = static_cast<double>(covered) / s.n_ues;
  s.median_sinr_db = median(sinr);
  s.median_rate_bps = median(rate);
  if (s.n_served > 0) {
    const double n = s.n_served;
    s.los_share = los / n;
    s.nlos_share = 1.0 - s.los_share;
    s.handover_share = handover / n;
    s.secondary_bpl_share = secondary / n;
    s.intra_inr_positive_share = intra_pos / n;
    s.inter_inr_positive_share = inter_pos / n;
  }
  return s;
}

}  // namespace hbf
