// SPDX-License-Identifier: Apache-2.0
//
// BPL allocation engines: the strongest-BPL 5G-NR baseline (hybrid or fully
// digital), distributed and centralized interference-aware allocation,
// exhaustive search, and CBF time sharing. Also the network report and the
// constraint checker shared by every mode.

#pragma once

#include "hbfsim/metrics.hpp"
#include "hbfsim/network.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hbf {

enum class AllocMode { kFiveGNr, kDiaba, kCiaba, kOracle, kDbf5gNr, kCbfTdma };

inline constexpr std::array<AllocMode, 6> kAllModes = {
    AllocMode::kFiveGNr, AllocMode::kDiaba,   AllocMode::kCiaba,
    AllocMode::kOracle,  AllocMode::kDbf5gNr, AllocMode::kCbfTdma};

inline std::string_view mode_name(AllocMode m) {
  switch (m) {
    case AllocMode::kFiveGNr: return "5gnr";
    case AllocMode::kDiaba: return "diaba";
    case AllocMode::kCiaba: return "ciaba";
    case AllocMode::kOracle: return "oracle";
    case AllocMode::kDbf5gNr: return "dbf";
    case AllocMode::kCbfTdma: return "cbf-tdma";
  }
  return "?";
}

inline AllocMode parse_mode(std::string_view name) {
  for (AllocMode m : kAllModes)
    if (mode_name(m) == name) return m;
  throw ConfigError("unknown allocation mode '" + std::string(name) +
                    "' (expected 5gnr, diaba, ciaba, oracle, dbf or cbf-tdma)");
}

inline Precoding precoding_of(AllocMode m) {
  switch (m) {
    case AllocMode::kDbf5gNr: return Precoding::kDigital;
    case AllocMode::kCbfTdma: return Precoding::kAnalog;
    default: return Precoding::kHybrid;
  }
}

struct Allocation {
  AllocMode mode = AllocMode::kFiveGNr;
  std::vector<std::optional<BeamPairLink>> serving;  // per UE; empty = dropped
  std::vector<std::vector<BeamPairLink>> per_gnb;    // ordered served links
  std::vector<GnbId> initial_gnb;                    // per UE; -1 if nothing detected

  int num_served() const {
    int n = 0;
    for (const auto& s : serving) n += s.has_value();
    return n;
  }
};

/// Initial-access gNB of every UE.
inline std::vector<GnbId> initial_gnbs(const Realization& r) {
  std::vector<GnbId> out(r.num_ues(), -1);
  for (UeId u = 0; u < r.num_ues(); ++u)
    if (auto l = initial_association(r.sweeps[u])) out[u] = l->gnb;
  return out;
}

/// UEs that detected at least one BPL, in allocation order.
inline std::vector<UeId> allocation_order(const Realization& r) {
  std::vector<UeId> order;
  for (UeId u = 0; u < r.num_ues(); ++u)
    if (!r.sweeps[u].empty()) order.push_back(u);
  if (r.cfg.ue_order == UeOrder::kBestRsrp)
    std::stable_sort(order.begin(), order.end(), [&](UeId a, UeId b) {
      return r.sweeps[a].front().rsrp > r.sweeps[b].front().rsrp;
    });
  return order;
}

/// BPLs a UE monitors under `mode`, strongest first.
inline std::vector<BeamPairLink> build_candidates(std::span<const BeamPairLink> sweep_result,
                                                  AllocMode mode, GnbId initial_gnb,
                                                  Unbounded n_csi_rs) {
  std::vector<BeamPairLink> out;
  if (sweep_result.empty()) return out;
  switch (mode) {
    case AllocMode::kFiveGNr:
    case AllocMode::kDbf5gNr:
    case AllocMode::kCbfTdma:
      out.push_back(sweep_result.front());
      return out;
    case AllocMode::kDiaba:
      for (const auto& l : sweep_result)
        if (l.gnb == initial_gnb) out.push_back(l);
      break;
    case AllocMode::kCiaba:
    case AllocMode::kOracle:
      out.assign(sweep_result.begin(), sweep_result.end());
      break;
  }
  if (n_csi_rs && static_cast<int>(out.size()) > *n_csi_rs) out.resize(*n_csi_rs);
  return out;
}

namespace detail {

inline Allocation to_allocation(const NetworkState& s, const Realization& r, AllocMode mode) {
  Allocation a;
  a.mode = mode;
  a.initial_gnb = initial_gnbs(r);
  a.serving.resize(r.num_ues());
  a.per_gnb.resize(r.num_gnbs());
  for (GnbId g = 0; g < r.num_gnbs(); ++g) {
    a.per_gnb[g] = s.links(g);
    for (const auto& l : s.links(g)) a.serving[l.ue] = l;
  }
  return a;
}

/// Served UE with the lowest SINR, or -1 if every served UE meets SINR_min.
inline UeId worst_below_min(const NetworkState& s, std::span<const BeamPairLink> among,
                            double sinr_min_db) {
  UeId worst = -1;
  double worst_sinr = sinr_min_db;
  for (const auto& l : among) {
    const double v = s.sinr_db(l.ue);
    if (v < worst_sinr) {
      worst_sinr = v;
      worst = l.ue;
    }
  }
  return worst;
}

/// Drops the weakest below-threshold UE network-wide until every served UE
/// satisfies SINR_min.
inline void enforce_min_sinr(NetworkState& s, const NetworkConfig& cfg) {
  for (;;) {
    std::vector<BeamPairLink> all;
    for (GnbId g = 0; g < s.num_gnbs(); ++g)
      all.insert(all.end(), s.links(g).begin(), s.links(g).end());
    const UeId worst = worst_below_min(s, all, cfg.sinr_min_db);
    if (worst < 0) return;
    s.commit(s.trial_remove(worst));
  }
}

}  // namespace detail

/// Strongest-BPL admission: each UE takes its rank-1 BPL if RF chains allow;
/// UEs on that gNB pushed below SINR_min are then dropped, weakest first.
inline Allocation allocate_5gnr(const LinkEvaluator& ev, Precoding precoding = Precoding::kHybrid) {
  const Realization& r = ev.realization();
  NetworkState state(ev, precoding);
  for (UeId u : allocation_order(r)) {
    const BeamPairLink& best = r.sweeps[u].front();
    try {
      state.commit(state.trial_add(best));
    } catch (const CapacityError&) {
      continue;
    } catch (const RankDeficiencyError&) {
      continue;
    }
    for (;;) {
      const UeId worst = detail::worst_below_min(state, state.links(best.gnb), r.cfg.sinr_min_db);
      if (worst < 0) break;
      state.commit(state.trial_remove(worst));
    }
  }
  detail::enforce_min_sinr(state, r.cfg);
  return detail::to_allocation(
      state, r, precoding == Precoding::kDigital ? AllocMode::kDbf5gNr : AllocMode::kFiveGNr);
}

/// Interference-aware allocation. Each UE tries its candidates against the
/// current allocation and commits the one with the highest own SINR among
/// those that keep every checked UE at or above SINR_min. dIABA checks the
/// candidate's gNB only, cIABA the whole network.
inline Allocation allocate_iaba(const LinkEvaluator& ev, AllocMode mode) {
  if (mode != AllocMode::kDiaba && mode != AllocMode::kCiaba)
    throw ContractViolation("allocate_iaba: mode must be diaba or ciaba");
  const Realization& r = ev.realization();
  const double sinr_min = r.cfg.sinr_min_db;
  const std::vector<GnbId> initial = initial_gnbs(r);
  NetworkState state(ev, Precoding::kHybrid);

  for (UeId u : allocation_order(r)) {
    const auto candidates = build_candidates(r.sweeps[u], mode, initial[u], r.cfg.n_csi_rs);
    std::optional<NetworkState::Trial> best;
    double best_sinr = -std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
      NetworkState::Trial t;
      try {
        t = state.trial_add(c);
      } catch (const CapacityError&) {
        continue;
      } catch (const RankDeficiencyError&) {
        continue;
      }
      const double own = state.sinr_db(u, t);
      if (!(own >= sinr_min) || (best && !(own > best_sinr))) continue;

      bool feasible = true;
      auto check = [&](UeId v) {
        const double after = state.sinr_db(v, t);
        if (after >= sinr_min) return true;
        const double before = state.sinr_db(v);
        return before < sinr_min && after >= before;  // already below and not made worse
      };
      if (mode == AllocMode::kDiaba) {
        for (const auto& l : state.links(c.gnb))
          if (!(feasible = check(l.ue))) break;
      } else {
        for (GnbId g = 0; g < r.num_gnbs() && feasible; ++g)
          for (const auto& l : state.links(g))
            if (!(feasible = check(l.ue))) break;
      }
      if (!feasible) continue;
      best = std::move(t);
      best_sinr = own;
    }
    if (best) state.commit(std::move(*best));
  }
  detail::enforce_min_sinr(state, r.cfg);
  return detail::to_allocation(state, r, mode);
}

// ---------------------------------------------------------------------------
// Link reports

struct NetworkReport {
  std::vector<LinkReport> links;  // one per deployed UE
  NetworkSummary summary;
};

namespace detail {

inline LinkReport dropped_report(UeId u, const NetworkConfig& cfg) {
  LinkReport rep;
  rep.ue = u;
  rep.noise_w = cfg.noise_w();
  return rep;
}

/// Time-shared CBF: per-UE signal and slot-averaged inter-cell power.
struct TdmaPowers {
  std::vector<double> rss;
  std::vector<double> inter;
  std::vector<int> n_shared;
};

inline TdmaPowers tdma_powers(const LinkEvaluator& ev,
                              const std::vector<std::vector<BeamPairLink>>& per_gnb) {
  const Realization& r = ev.realization();
  const NetworkConfig& cfg = r.cfg;
  const double p = cfg.p_max_w();
  const int draws = cfg.tdma_slot_draws;
  Rng rng = make_rng(cfg.seed, r.dep.realization_id, 0x7D3AC0DEu);
  std::vector<std::vector<int>> picks(draws, std::vector<int>(r.num_gnbs(), -1));
  for (auto& slot : picks)
    for (GnbId g = 0; g < r.num_gnbs(); ++g)
      if (!per_gnb[g].empty())
        slot[g] = std::uniform_int_distribution<int>(0, static_cast<int>(per_gnb[g].size()) - 1)(rng);

  TdmaPowers out;
  out.rss.assign(r.num_ues(), 0.0);
  out.inter.assign(r.num_ues(), 0.0);
  out.n_shared.assign(r.num_ues(), 0);
  for (GnbId j = 0; j < r.num_gnbs(); ++j) {
    for (const auto& l : per_gnb[j]) {
      const CVector w = r.gnb_books[j].embed(l.gnb_beam);
      out.rss[l.ue] = p * std::norm(ev.true_row(l.ue, l.ue_beam, j).dot(w.conjugate()));
      out.n_shared[l.ue] = static_cast<int>(per_gnb[j].size());
      double acc = 0.0;
      for (const auto& slot : picks) {
        for (GnbId g = 0; g < r.num_gnbs(); ++g) {
          if (g == j || slot[g] < 0) continue;
          const CVector wi = r.gnb_books[g].embed(per_gnb[g][slot[g]].gnb_beam);
          acc += p * std::norm(ev.true_row(l.ue, l.ue_beam, g).dot(wi.conjugate()));
        }
      }
      out.inter[l.ue] = acc / draws;
    }
  }
  return out;
}

inline double tdma_sinr_db(const TdmaPowers& t, UeId u, double noise_w) {
  return linear_to_db(t.rss[u] / (t.inter[u] + noise_w));
}

}  // namespace detail

/// Precoder states of a finalized HBF or DBF allocation.
inline std::vector<GnbPrecoderState> build_states(const LinkEvaluator& ev,
                                                  const std::vector<std::vector<BeamPairLink>>& per_gnb,
                                                  Precoding precoding) {
  std::vector<GnbPrecoderState> states;
  states.reserve(per_gnb.size());
  for (GnbId g = 0; g < static_cast<GnbId>(per_gnb.size()); ++g)
    states.push_back(build_precoder(ev, g, per_gnb[g], precoding));
  return states;
}

/// Per-UE reports computed from scratch on true channels.
inline NetworkReport network_report(const LinkEvaluator& ev, const Allocation& a) {
  const Realization& r = ev.realization();
  const NetworkConfig& cfg = r.cfg;
  NetworkReport out;
  out.links.reserve(r.num_ues());
  for (UeId u = 0; u < r.num_ues(); ++u) out.links.push_back(detail::dropped_report(u, cfg));

  auto fill_flags = [&](LinkReport& rep, const BeamPairLink& l) {
    rep.gnb = l.gnb;
    rep.served = true;
    rep.alloc_rank = l.candidate_rank;
    rep.is_los = l.is_los;
    rep.is_handover = !a.initial_gnb.empty() && a.initial_gnb[l.ue] != l.gnb;
  };

  if (a.mode == AllocMode::kCbfTdma) {
    const auto t = detail::tdma_powers(ev, a.per_gnb);
    for (const auto& links : a.per_gnb)
      for (const auto& l : links) {
        LinkReport& rep = out.links[l.ue];
        fill_flags(rep, l);
        rep.rss_w = t.rss[l.ue];
        rep.i_inter_w = t.inter[l.ue];
        finish_report(rep, t.n_shared[l.ue], cfg);
      }
  } else {
    const auto states = build_states(ev, a.per_gnb, precoding_of(a.mode));
    std::vector<const CRowVector*> rows(r.num_gnbs());
    for (GnbId j = 0; j < r.num_gnbs(); ++j) {
      for (int c = 0; c < static_cast<int>(a.per_gnb[j].size()); ++c) {
        const BeamPairLink& l = a.per_gnb[j][c];
        for (GnbId g = 0; g < r.num_gnbs(); ++g) rows[g] = &ev.true_row(l.ue, l.ue_beam, g);
        LinkReport& rep = out.links[l.ue];
        fill_flags(rep, l);
        rep.rss_w = rss(*rows[j], states[j], c);
        rep.i_intra_w = intra_interference(*rows[j], states[j], c);
        rep.i_inter_w = inter_interference(rows, states, j);
        finish_report(rep, 1.0, cfg);
      }
    }
  }
  out.summary = summarize(out.links, cfg);
  return out;
}

// ---------------------------------------------------------------------------
// CBF time sharing

/// Every UE joins its rank-1 BPL; gNBs serve their UEs one slot at a time
/// with the full power budget. UEs below SINR_min are dropped weakest first.
inline Allocation allocate_cbf_tdma(const LinkEvaluator& ev) {
  const Realization& r = ev.realization();
  Allocation a;
  a.mode = AllocMode::kCbfTdma;
  a.initial_gnb = initial_gnbs(r);
  a.serving.resize(r.num_ues());
  a.per_gnb.resize(r.num_gnbs());
  for (UeId u : allocation_order(r)) {
    const BeamPairLink& l = r.sweeps[u].front();
    a.serving[u] = l;
    a.per_gnb[l.gnb].push_back(l);
  }
  const double noise = r.cfg.noise_w();
  for (;;) {
    const auto t = detail::tdma_powers(ev, a.per_gnb);
    UeId worst = -1;
    double worst_sinr = r.cfg.sinr_min_db;
    for (const auto& links : a.per_gnb)
      for (const auto& l : links) {
        const double v = detail::tdma_sinr_db(t, l.ue, noise);
        if (v < worst_sinr) {
          worst_sinr = v;
          worst = l.ue;
        }
      }
    if (worst < 0) break;
    auto& links = a.per_gnb[a.serving[worst]->gnb];
    links.erase(std::find_if(links.begin(), links.end(),
                             [&](const BeamPairLink& l) { return l.ue == worst; }));
    a.serving[worst].reset();
  }
  return a;
}

// ---------------------------------------------------------------------------
// Exhaustive search

struct OracleLimits {
  int max_gnbs = 3;
  int max_ues = 6;
  int max_candidates = 4;
};

/// Sum throughput of a complete HBF assignment, or nullopt if it breaks RF
/// capacity, cannot be zero-forced, or leaves a served UE below SINR_min.
inline std::optional<double> assignment_throughput(const LinkEvaluator& ev,
                                                   const std::vector<std::vector<BeamPairLink>>& per_gnb) {
  const NetworkConfig& cfg = ev.cfg();
  std::vector<GnbPrecoderState> states;
  try {
    states = build_states(ev, per_gnb, Precoding::kHybrid);
  } catch (const CapacityError&) {
    return std::nullopt;
  } catch (const RankDeficiencyError&) {
    return std::nullopt;
  }
  const int n_gnbs = static_cast<int>(per_gnb.size());
  std::vector<const CRowVector*> rows(n_gnbs);
  double total = 0.0;
  for (GnbId j = 0; j < n_gnbs; ++j) {
    for (int c = 0; c < static_cast<int>(per_gnb[j].size()); ++c) {
      const BeamPairLink& l = per_gnb[j][c];
      for (GnbId g = 0; g < n_gnbs; ++g) rows[g] = &ev.true_row(l.ue, l.ue_beam, g);
      const double s = rss(*rows[j], states[j], c);
      const double i = intra_interference(*rows[j], states[j], c) +
                       inter_interference(rows, states, j);
      const double sinr = linear_to_db(s / (i + cfg.noise_w()));
      if (!(sinr >= cfg.sinr_min_db)) return std::nullopt;
      total += throughput(sinr, cfg);
    }
  }
  return total;
}

/// Maximizes sum throughput over every assignment of each UE to one of its
/// candidates or to nothing. Choice c of a UE with k candidates means
/// candidate c for c < k and "dropped" for c == k; assignments are scanned
/// in lexicographic order of the choice vector and only a strictly better
/// one replaces the incumbent.
inline Allocation allocate_oracle(const LinkEvaluator& ev, const OracleLimits& limits = {}) {
  const Realization& r = ev.realization();
  if (r.num_gnbs() > limits.max_gnbs || r.num_ues() > limits.max_ues)
    throw OracleRefusal("exhaustive search is limited to " + std::to_string(limits.max_gnbs) +
                        " gNBs and " + std::to_string(limits.max_ues) + " UEs");
  std::vector<std::vector<BeamPairLink>> cands(r.num_ues());
  for (UeId u = 0; u < r.num_ues(); ++u) {
    cands[u] = build_candidates(r.sweeps[u], AllocMode::kOracle, -1, r.cfg.n_csi_rs);
    if (static_cast<int>(cands[u].size()) > limits.max_candidates)
      throw OracleRefusal("UE " + std::to_string(u) + " has more than " +
                          std::to_string(limits.max_candidates) + " candidates");
  }

  std::vector<int> choice(r.num_ues(), 0);
  std::vector<int> best_choice;
  double best_total = -1.0;
  std::vector<std::vector<BeamPairLink>> per_gnb(r.num_gnbs());
  for (;;) {
    for (auto& v : per_gnb) v.clear();
    for (UeId u = 0; u < r.num_ues(); ++u)
      if (choice[u] < static_cast<int>(cands[u].size()))
        per_gnb[cands[u][choice[u]].gnb].push_back(cands[u][choice[u]]);
    if (auto total = assignment_throughput(ev, per_gnb); total && *total > best_total) {
      best_total = *total;
      best_choice = choice;
    }
    int u = r.num_ues() - 1;
    while (u >= 0 && choice[u] == static_cast<int>(cands[u].size())) choice[u--] = 0;
    if (u < 0) break;
    ++choice[u];
  }

  Allocation a;
  a.mode = AllocMode::kOracle;
  a.initial_gnb = initial_gnbs(r);
  a.serving.resize(r.num_ues());
  a.per_gnb.resize(r.num_gnbs());
  for (UeId u = 0; u < r.num_ues(); ++u) {
    if (best_choice[u] >= static_cast<int>(cands[u].size())) continue;
    const BeamPairLink& l = cands[u][best_choice[u]];
    a.serving[u] = l;
    a.per_gnb[l.gnb].push_back(l);
  }
  return a;
}

// ---------------------------------------------------------------------------

inline Allocation allocate(const LinkEvaluator& ev, AllocMode mode) {
  switch (mode) {
    case AllocMode::kFiveGNr: return allocate_5gnr(ev, Precoding::kHybrid);
    case AllocMode::kDbf5gNr: return allocate_5gnr(ev, Precoding::kDigital);
    case AllocMode::kDiaba:
    case AllocMode::kCiaba: return allocate_iaba(ev, mode);
    case AllocMode::kOracle: return allocate_oracle(ev);
    case AllocMode::kCbfTdma: return allocate_cbf_tdma(ev);
  }
  throw ContractViolation("allocate: unknown mode");
}

/// Violations of the minimum-SINR, RF-chain, power-split and one-BPL-per-UE
/// constraints; empty when the allocation is valid.
inline std::vector<std::string> check_constraints(const LinkEvaluator& ev, const Allocation& a) {
  const Realization& r = ev.realization();
  const NetworkConfig& cfg = r.cfg;
  std::vector<std::string> bad;
  auto fail = [&](std::string msg) { bad.push_back(std::move(msg)); };

  if (static_cast<int>(a.serving.size()) != r.num_ues() ||
      static_cast<int>(a.per_gnb.size()) != r.num_gnbs()) {
    fail("allocation shape does not match the realization");
    return bad;
  }
  std::vector<int> seen(r.num_ues(), 0);
  for (GnbId g = 0; g < r.num_gnbs(); ++g) {
    std::array<int, kNumSectors> per_panel{};
    for (const auto& l : a.per_gnb[g]) {
      if (l.gnb != g) fail("UE " + std::to_string(l.ue) + " listed on the wrong gNB");
      if (++seen[l.ue] > 1) fail("UE " + std::to_string(l.ue) + " holds more than one BPL");
      if (!a.serving[l.ue] || !(*a.serving[l.ue] == l))
        fail("UE " + std::to_string(l.ue) + " serving entry disagrees with gNB list");
      ++per_panel[r.gnb_books[g].panel_of(l.gnb_beam)];
    }
    if (a.mode == AllocMode::kCbfTdma) continue;  // one UE per slot
    const int n = static_cast<int>(a.per_gnb[g].size());
    if (n > cfg.n_rf_gnb()) fail("gNB " + std::to_string(g) + " exceeds its RF chains");
    if (a.mode != AllocMode::kDbf5gNr)
      for (int p = 0; p < kNumSectors; ++p)
        if (per_panel[p] > cfg.n_rf_gnb_sec)
          fail("gNB " + std::to_string(g) + " panel " + std::to_string(p) + " exceeds its RF chains");
  }
  for (UeId u = 0; u < r.num_ues(); ++u)
    if (a.serving[u] && seen[u] != 1) fail("UE " + std::to_string(u) + " served but not listed");

  if (a.mode != AllocMode::kCbfTdma) {
    std::vector<GnbPrecoderState> states;
    try {
      states = build_states(ev, a.per_gnb, precoding_of(a.mode));
    } catch (const std::exception& e) {
      fail(std::string("precoders cannot be rebuilt: ") + e.what());
      return bad;
    }
    for (const auto& s : states) {
      if (s.served.empty()) continue;
      const double total = s.p_per_ue * s.num_served();
      if (std::abs(total - cfg.p_max_w()) > 1e-12 * cfg.p_max_w())
        fail("gNB " + std::to_string(s.gnb) + " power split does not sum to P_max");
      for (int i = 0; i < s.num_served(); ++i)
        if (std::abs(s.w_combined.col(i).norm() - 1.0) > 1e-9)
          fail("gNB " + std::to_string(s.gnb) + " precoder column not unit norm");
    }
  }
  const NetworkReport rep = network_report(ev, a);
  for (const auto& l : rep.links)
    if (l.served && !(l.sinr_db >= cfg.sinr_min_db))
      fail("UE " + std::to_string(l.ue) + " served below SINR_min");
  return bad;
}

}  // namespace hbf
