// SPDX-License-Identifier: Apache-2.0
//
// One network realization (deployment, true and estimated channels, sweep
// results) plus the incremental SINR bookkeeping the allocation engines run
// on.

#pragma once

#include "hbfsim/beamsweep.hpp"
#include "hbfsim/channel.hpp"
#include "hbfsim/codebook.hpp"
#include "hbfsim/config.hpp"
#include "hbfsim/csi.hpp"
#include "hbfsim/metrics.hpp"
#include "hbfsim/precoder.hpp"
#include "hbfsim/scenario.hpp"
#include "hbfsim/trace.hpp"

#include <cstring>
#include <memory>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hbf {

struct Realization {
  NetworkConfig cfg;
  ArrayGeometry geo;
  Deployment dep;
  std::vector<FullCodebook> gnb_books;
  std::vector<FullCodebook> ue_books;
  std::vector<std::vector<MultiPanelChannel>> channels;   // [gnb][ue]
  std::vector<std::vector<MultiPanelChannel>> estimates;  // [gnb][ue]; empty with exact CSI
  std::vector<std::vector<BeamPairLink>> sweeps;          // per UE, strongest first

  int num_gnbs() const { return dep.num_gnbs(); }
  int num_ues() const { return dep.num_ues(); }
  bool exact_csi() const { return estimates.empty(); }
  const MultiPanelChannel& true_channel(GnbId g, UeId u) const { return channels[g][u]; }
  const MultiPanelChannel& estimate(GnbId g, UeId u) const {
    return exact_csi() ? channels[g][u] : estimates[g][u];
  }
};

namespace detail {

inline void build_books(Realization& r) {
  const auto gnb_sector = std::make_shared<const SectorCodebook>(
      build_sector_codebook(r.cfg.n_q_sweep_bits, r.geo.gnb_panel, r.geo.d_over_lambda));
  const auto ue_sector = std::make_shared<const SectorCodebook>(
      build_sector_codebook(r.cfg.n_q_sweep_bits, r.geo.ue_panel, r.geo.d_over_lambda));
  for (const auto& o : r.dep.gnb_panel_orientations) r.gnb_books.push_back(full_codebook(gnb_sector, o));
  for (const auto& o : r.dep.ue_panel_orientations) r.ue_books.push_back(full_codebook(ue_sector, o));
}

inline void build_estimates(Realization& r, const std::vector<std::vector<std::vector<PropagationPath>>>& paths) {
  if (!r.cfg.n_q_csi_bits) return;
  r.estimates.resize(r.num_gnbs());
  for (GnbId g = 0; g < r.num_gnbs(); ++g) {
    const auto& go = r.dep.gnb_panel_orientations[g];
    const EstimationGrid gnb_grid = estimation_grid(r.cfg.n_q_csi_bits, go[0]);
    r.estimates[g].reserve(r.num_ues());
    for (UeId u = 0; u < r.num_ues(); ++u) {
      const auto& uo = r.dep.ue_panel_orientations[u];
      const EstimationGrid ue_grid = estimation_grid(r.cfg.n_q_csi_bits, uo[0]);
      r.estimates[g].push_back(
          estimate_channel(quantize_paths(paths[g][u], gnb_grid, ue_grid), r.geo, go, uo));
    }
  }
}

inline void run_sweeps(Realization& r) {
  const SweepOptions opt = sweep_options(r.cfg);
  r.sweeps.resize(r.num_ues());
  std::vector<const MultiPanelChannel*> towards(r.num_gnbs());
  for (UeId u = 0; u < r.num_ues(); ++u) {
    for (GnbId g = 0; g < r.num_gnbs(); ++g) towards[g] = &r.channels[g][u];
    r.sweeps[u] = sweep(u, towards, r.gnb_books, r.ue_books[u], opt);
  }
}

}  // namespace detail

/// Assembles a realization from explicit per-pair paths; pairs missing from
/// `paths` get no channel.
inline Realization make_realization(const NetworkConfig& cfg, Deployment dep, const PathMap& paths) {
  validate(cfg);
  if (dep.gnb_panel_orientations.size() != dep.gnb_positions.size() ||
      dep.ue_panel_orientations.size() != dep.ue_positions.size())
    throw ContractViolation("make_realization: one orientation per node required");
  Realization r;
  r.cfg = cfg;
  r.geo = array_geometry(cfg);
  r.dep = std::move(dep);
  for (const auto& [key, list] : paths)
    if (key.first < 0 || key.first >= r.num_gnbs() || key.second < 0 || key.second >= r.num_ues())
      throw ReferenceError("path set refers to gNB " + std::to_string(key.first) + " / UE " +
                           std::to_string(key.second) + " outside the deployment");

  std::vector<std::vector<std::vector<PropagationPath>>> grid(
      r.num_gnbs(), std::vector<std::vector<PropagationPath>>(r.num_ues()));
  for (const auto& [key, list] : paths) grid[key.first][key.second] = list;

  detail::build_books(r);
  r.channels.resize(r.num_gnbs());
  for (GnbId g = 0; g < r.num_gnbs(); ++g) {
    r.channels[g].reserve(r.num_ues());
    for (UeId u = 0; u < r.num_ues(); ++u)
      r.channels[g].push_back(assemble_channel(grid[g][u], r.geo, r.dep.gnb_panel_orientations[g],
                                               r.dep.ue_panel_orientations[u]));
  }
  detail::build_estimates(r, grid);
  detail::run_sweeps(r);
  return r;
}

/// Deployment, synthetic (or replayed) channels, CSI estimates and sweep for
/// realization `id`.
inline Realization build_realization(const NetworkConfig& cfg, int id) {
  validate(cfg);
  Deployment dep = generate_deployment(cfg, id);
  if (!cfg.trace_file.empty()) {
    PathMap traced = ingest_paths(cfg.trace_file, dep.num_gnbs(), dep.num_ues());
    return make_realization(cfg, std::move(dep), traced);
  }
  const PropagationEnvironment env = generate_environment(dep, cfg);
  PathMap paths;
  for (GnbId g = 0; g < dep.num_gnbs(); ++g) {
    for (UeId u = 0; u < dep.num_ues(); ++u) {
      Rng rng = pair_rng(cfg, id, g, u);
      auto list = synthesize_paths(env, dep, g, u, cfg, rng);
      if (!list.empty()) paths.emplace(std::pair{g, u}, std::move(list));
    }
  }
  return make_realization(cfg, std::move(dep), paths);
}

// ---------------------------------------------------------------------------
// Hashing

/// FNV-1a over raw bytes.
class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001B3ULL;
    }
  }
  template <typename T>
  void value(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    bytes(&v, sizeof(T));
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

/// Fingerprint of deployment and true channel data, used to check that
/// paired modes saw identical inputs.
inline std::uint64_t realization_hash(const Realization& r) {
  Fnv1a h;
  for (const auto& p : r.dep.gnb_positions) h.value(p);
  for (const auto& o : r.dep.gnb_panel_orientations) h.value(o);
  for (const auto& p : r.dep.ue_positions) h.value(p);
  for (const auto& o : r.dep.ue_panel_orientations) h.value(o);
  for (const auto& row : r.channels)
    for (const auto& ch : row)
      for (const auto& path : ch.exact_paths) {
        h.value(path.gain);
        h.value(path.aod_az_deg);
        h.value(path.aod_el_deg);
        h.value(path.aoa_az_deg);
        h.value(path.aoa_el_deg);
        h.value(path.bounces);
        h.value(path.path_length_m);
      }
  return h.digest();
}

// ---------------------------------------------------------------------------
// Row cache

/// Caches w_c^H H over the full gNB array for every (UE, UE beam, gNB)
/// queried, on both true and estimated channels.
class LinkEvaluator {
 public:
  explicit LinkEvaluator(const Realization& r) : r_(&r) {}

  const Realization& realization() const { return *r_; }
  const NetworkConfig& cfg() const { return r_->cfg; }

  const CRowVector& true_row(UeId u, BeamId ue_beam, GnbId g) const {
    return row(true_rows_, r_->true_channel(g, u), u, ue_beam, g);
  }
  const CRowVector& est_row(UeId u, BeamId ue_beam, GnbId g) const {
    if (r_->exact_csi()) return true_row(u, ue_beam, g);
    return row(est_rows_, r_->estimate(g, u), u, ue_beam, g);
  }

 private:
  using Cache = std::unordered_map<std::uint64_t, CRowVector>;

  const CRowVector& row(Cache& cache, const MultiPanelChannel& h, UeId u, BeamId ue_beam,
                        GnbId g) const {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(u) * r_->ue_books[u].size() + ue_beam) * r_->num_gnbs() + g;
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const FullCodebook& book = r_->ue_books[u];
    return cache.emplace(key, h.combine(book.panel_of(ue_beam), book.panel_weights(ue_beam)))
        .first->second;
  }

  const Realization* r_;
  mutable Cache true_rows_;
  mutable Cache est_rows_;
};

/// Precoder of one gNB for the given serving links (estimated channels).
/// Throws CapacityError or RankDeficiencyError for infeasible sets.
inline GnbPrecoderState build_precoder(const LinkEvaluator& ev, GnbId g,
                                       std::span<const BeamPairLink> links, Precoding mode) {
  const NetworkConfig& cfg = ev.cfg();
  const FullCodebook& book = ev.realization().gnb_books[g];
  GnbPrecoderState s;
  s.gnb = g;
  for (const auto& l : links) s.served.push_back(l.ue);
  const int n = static_cast<int>(links.size());
  const int dim = kNumSectors * book.elements_per_panel();
  if (n == 0) {
    s.w_rf = s.w_bb = s.w_combined = CMatrix(dim, 0);
    return s;
  }
  switch (mode) {
    case Precoding::kHybrid: {
      s.w_rf = rf_stage(links, book, cfg.n_rf_gnb_sec, cfg.n_rf_gnb());
      std::vector<EffectiveChannel> rows;
      rows.reserve(n);
      for (const auto& l : links) rows.push_back({ev.est_row(l.ue, l.ue_beam, g) * s.w_rf, l.ue});
      s.w_bb = zf_stage(rows, s.w_rf);
      s.w_combined = compose(s.w_rf, s.w_bb);
      break;
    }
    case Precoding::kDigital: {
      if (n > cfg.n_rf_gnb()) throw CapacityError("more served UEs than gNB RF chains");
      CMatrix rows(n, dim);
      for (int i = 0; i < n; ++i) rows.row(i) = ev.est_row(links[i].ue, links[i].ue_beam, g);
      s.w_combined = dbf_precoder(rows, s.served);
      s.w_rf = s.w_combined;
      s.w_bb = CMatrix::Identity(n, n);
      break;
    }
    case Precoding::kAnalog: {
      if (n != 1) throw ContractViolation("analog precoding serves one UE at a time");
      s.w_rf = s.w_combined = book.embed(links[0].gnb_beam);
      s.w_bb = CMatrix::Identity(1, 1);
      break;
    }
  }
  s.p_per_ue = cfg.p_max_w() / n;
  return s;
}

// ---------------------------------------------------------------------------
// Incremental network state

/// Served links, precoders and per-UE received powers of a network under
/// construction. Changes are staged as Trials and applied with commit().
class NetworkState {
 public:
  struct Trial {
    GnbId gnb = -1;
    std::vector<BeamPairLink> links;  // new serving list of `gnb`
    GnbPrecoderState state;
    UeId added = -1;
    UeId removed = -1;
    std::vector<double> recv;    // [ue] power from `gnb` under the new state
    std::vector<double> signal;  // [ue] own-stream power, UEs on `gnb`
    std::vector<double> intra;   // [ue] co-stream power, UEs on `gnb`
    std::vector<double> added_recv;  // [gnb] power at the added UE from every gNB
  };

  NetworkState(const LinkEvaluator& ev, Precoding mode)
      : ev_(&ev),
        mode_(mode),
        n_ues_(ev.realization().num_ues()),
        n_gnbs_(ev.realization().num_gnbs()),
        noise_w_(ev.cfg().noise_w()),
        links_(n_gnbs_),
        states_(n_gnbs_),
        serving_(n_ues_),
        recv_(static_cast<std::size_t>(n_ues_) * n_gnbs_, 0.0),
        signal_(n_ues_, 0.0),
        intra_(n_ues_, 0.0) {
    for (GnbId g = 0; g < n_gnbs_; ++g) states_[g] = build_precoder(ev, g, {}, mode_);
  }

  Precoding precoding() const { return mode_; }
  int num_ues() const { return n_ues_; }
  int num_gnbs() const { return n_gnbs_; }
  bool is_served(UeId u) const { return serving_[u].has_value(); }
  const std::optional<BeamPairLink>& serving(UeId u) const { return serving_[u]; }
  const std::vector<BeamPairLink>& links(GnbId g) const { return links_[g]; }
  const GnbPrecoderState& state(GnbId g) const { return states_[g]; }

  std::vector<UeId> served_ues() const {
    std::vector<UeId> out;
    for (UeId u = 0; u < n_ues_; ++u)
      if (serving_[u]) out.push_back(u);
    return out;
  }

  Trial trial_add(const BeamPairLink& link) const {
    if (serving_[link.ue]) throw ContractViolation("trial_add: UE already served");
    Trial t;
    t.gnb = link.gnb;
    t.added = link.ue;
    t.links = links_[link.gnb];
    t.links.push_back(link);
    stage(t);
    t.added_recv.assign(n_gnbs_, 0.0);
    for (GnbId g = 0; g < n_gnbs_; ++g) {
      if (g == link.gnb) continue;
      t.added_recv[g] = total_power(ev_->true_row(link.ue, link.ue_beam, g), states_[g]);
    }
    t.added_recv[link.gnb] = t.recv[link.ue];
    return t;
  }

  Trial trial_remove(UeId u) const {
    if (!serving_[u]) throw ContractViolation("trial_remove: UE not served");
    Trial t;
    t.gnb = serving_[u]->gnb;
    t.removed = u;
    for (const auto& l : links_[t.gnb])
      if (l.ue != u) t.links.push_back(l);
    stage(t);
    return t;
  }

  void commit(Trial&& t) {
    const GnbId g = t.gnb;
    if (t.removed >= 0) {
      serving_[t.removed].reset();
      signal_[t.removed] = intra_[t.removed] = 0.0;
      for (GnbId k = 0; k < n_gnbs_; ++k) recv(t.removed, k) = 0.0;
    }
    if (t.added >= 0) {
      serving_[t.added] = t.links.back();
      for (GnbId k = 0; k < n_gnbs_; ++k) recv(t.added, k) = t.added_recv[k];
    }
    for (UeId u = 0; u < n_ues_; ++u) {
      if (!serving_[u]) continue;
      recv(u, g) = t.recv[u];
      if (serving_[u]->gnb == g) {
        signal_[u] = t.signal[u];
        intra_[u] = t.intra[u];
      }
    }
    links_[g] = std::move(t.links);
    states_[g] = std::move(t.state);
  }

  double sinr_db(UeId u) const {
    const GnbId j = serving_[u]->gnb;
    double inter = 0.0;
    for (GnbId k = 0; k < n_gnbs_; ++k)
      if (k != j) inter += recv(u, k);
    return linear_to_db(signal_[u] / (intra_[u] + inter + noise_w_));
  }

  /// SINR of `u` as if `t` were committed; `u` must be served afterwards.
  double sinr_db(UeId u, const Trial& t) const {
    if (u == t.added) {
      double inter = 0.0;
      for (GnbId k = 0; k < n_gnbs_; ++k)
        if (k != t.gnb) inter += t.added_recv[k];
      return linear_to_db(t.signal[u] / (t.intra[u] + inter + noise_w_));
    }
    const GnbId j = serving_[u]->gnb;
    double inter = 0.0;
    for (GnbId k = 0; k < n_gnbs_; ++k) {
      if (k == j) continue;
      inter += k == t.gnb ? t.recv[u] : recv(u, k);
    }
    if (j == t.gnb) return linear_to_db(t.signal[u] / (t.intra[u] + inter + noise_w_));
    return linear_to_db(signal_[u] / (intra_[u] + inter + noise_w_));
  }

 private:
  double& recv(UeId u, GnbId g) { return recv_[static_cast<std::size_t>(u) * n_gnbs_ + g]; }
  double recv(UeId u, GnbId g) const { return recv_[static_cast<std::size_t>(u) * n_gnbs_ + g]; }

  /// Rebuilds the precoder of t.gnb and the powers it delivers to every UE
  /// that stays served.
  void stage(Trial& t) const {
    const GnbId g = t.gnb;
    t.state = build_precoder(*ev_, g, t.links, mode_);
    t.recv.assign(n_ues_, 0.0);
    t.signal.assign(n_ues_, 0.0);
    t.intra.assign(n_ues_, 0.0);
    for (int c = 0; c < static_cast<int>(t.links.size()); ++c) {
      const BeamPairLink& l = t.links[c];
      const CRowVector proj = ev_->true_row(l.ue, l.ue_beam, g) * t.state.w_combined;
      const double own = t.state.p_per_ue * std::norm(proj(c));
      double others = 0.0;
      for (int k = 0; k < proj.size(); ++k)
        if (k != c) others += std::norm(proj(k));
      t.signal[l.ue] = own;
      t.intra[l.ue] = t.state.p_per_ue * others;
      t.recv[l.ue] = own + t.intra[l.ue];
    }
    for (UeId u = 0; u < n_ues_; ++u) {
      if (!serving_[u] || serving_[u]->gnb == g || u == t.removed) continue;
      const BeamPairLink& l = *serving_[u];
      t.recv[u] = total_power(ev_->true_row(u, l.ue_beam, g), t.state);
    }
  }

  const LinkEvaluator* ev_;
  Precoding mode_;
  int n_ues_;
  int n_gnbs_;
  double noise_w_;
  std::vector<std::vector<BeamPairLink>> links_;
  std::vector<GnbPrecoderState> states_;
  std::vector<std::optional<BeamPairLink>> serving_;
  std::vector<double> recv_;
  std::vector<double> signal_;
  std::vector<double> intra_;
};

}  // namespace hbf
