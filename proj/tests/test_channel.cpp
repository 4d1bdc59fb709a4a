// SPDX-License-Identifier: Apache-2.0

#include "hbfsim/hbfsim.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace hbf {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Steering, UlaBoresightAndEndfire) {
  const CVector a = ula_steering(2, 0.5, 0.0);
  EXPECT_NEAR(std::abs(a(0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a(1) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  const CVector b = ula_steering(2, 0.5, 90.0);
  EXPECT_NEAR(std::abs(b(0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b(1) + 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
}

TEST(Steering, UlaThirtyDegreesQuarterTurnPerElement) {
  const CVector a = ula_steering(8, 0.5, 30.0);
  for (int m = 0; m < 8; ++m) {
    const Complex expected = std::polar(1.0 / std::sqrt(8.0), kPi * m / 2.0);
    EXPECT_NEAR(std::abs(a(m) - expected), 0.0, 1e-12) << m;
  }
}

TEST(Steering, UraBoresightIsUniform) {
  const CVector a = ura_steering(2, 2, 0.5, 0.0, 0.0);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(a(i) - 0.5), 0.0, 1e-15);
}

TEST(Steering, UraWithOneRowIsUla) {
  const CVector a = ura_steering(8, 1, 0.5, 23.0, -40.0);
  const CVector b = ula_steering(8, 0.5, 23.0);
  EXPECT_NEAR((a - b).norm(), 0.0, 1e-15);
}

TEST(Steering, UraMatchesPerElementPhase) {
  const double phi = 15.0, theta = -10.0;
  const CVector a = ura_steering(4, 4, 0.5, phi, theta);
  for (int h = 0; h < 4; ++h)
    for (int v = 0; v < 4; ++v) {
      const double phase = kPi * (h * std::sin(phi * kPi / 180.0) + v * std::sin(theta * kPi / 180.0));
      EXPECT_NEAR(std::abs(a(h * 4 + v) - std::polar(0.25, phase)), 0.0, 1e-12);
    }
}

TEST(Steering, UnitNormEverywhere) {
  for (int n : {1, 3, 16, 64})
    for (double phi = -90.0; phi <= 90.0; phi += 7.3) {
      EXPECT_NEAR(ula_steering(n, 0.5, phi).norm(), 1.0, 1e-12);
      const PanelShape s = panel_shape(n);
      EXPECT_NEAR(ura_steering(s, 0.5, phi, phi / 3.0).norm(), 1.0, 1e-12);
    }
  EXPECT_THROW(ula_steering(0, 0.5, 0.0), ContractViolation);
}

TEST(Steering, PanelShapeFactorization) {
  EXPECT_EQ(panel_shape(256), (PanelShape{16, 16}));
  EXPECT_EQ(panel_shape(64), (PanelShape{8, 8}));
  EXPECT_EQ(panel_shape(32), (PanelShape{8, 4}));
  EXPECT_EQ(panel_shape(7), (PanelShape{7, 1}));
}

TEST(Propagation, FreeSpaceLossAtHundredMetres) {
  NetworkConfig cfg;
  const PropagationPath p =
      trace_path({0, 0, 0}, {100, 0, 0}, std::nullopt, cfg.wavelength_m(), cfg.reflection_loss_db);
  const double lambda = 299792458.0 / 28e9;
  const double fspl_db = 20.0 * std::log10(4.0 * kPi * 100.0 / lambda);
  EXPECT_NEAR(fspl_db, 101.4, 0.05);
  EXPECT_NEAR(std::abs(p.gain), std::pow(10.0, -fspl_db / 20.0), 1e-18);
  EXPECT_TRUE(p.is_los());
  EXPECT_DOUBLE_EQ(p.path_length_m, 100.0);
}

TEST(Propagation, ReflectionAddsFixedLoss) {
  const double lambda = 0.01;
  const Complex direct = path_gain(80.0, 0, lambda, 13.0);
  const Complex bounced = path_gain(80.0, 1, lambda, 13.0);
  EXPECT_NEAR(20.0 * std::log10(std::abs(direct) / std::abs(bounced)), 13.0, 1e-9);
}

TEST(Propagation, GainStrictlyDecreasesWithLength) {
  double prev = std::numeric_limits<double>::infinity();
  for (double len = 1.0; len < 1000.0; len *= 1.3) {
    const double g = std::abs(path_gain(len, 0, 0.0107, 13.0));
    EXPECT_LT(g, prev);
    prev = g;
  }
}

TEST(Propagation, ScattererOnSegmentKeepsLosDeparture) {
  const Point3 tx{0, 0, 6}, rx{30, 40, 6};
  const PropagationPath los = trace_path(tx, rx, std::nullopt, 0.0107, 13.0);
  const PropagationPath nlos = trace_path(tx, rx, Point3{15, 20, 6}, 0.0107, 13.0);
  EXPECT_NEAR(nlos.aod_az_deg, los.aod_az_deg, 1e-12);
  EXPECT_NEAR(nlos.aod_el_deg, los.aod_el_deg, 1e-12);
  EXPECT_NEAR(nlos.path_length_m, los.path_length_m, 1e-12);
  EXPECT_EQ(nlos.bounces, 1);
}

TEST(Propagation, SwappingEndsSwapsDepartureAndArrival) {
  const Point3 a{3, 7, 6}, b{80, -20, 1.5};
  const std::optional<Point3> via = Point3{40, 30, 4};
  const PropagationPath ab = trace_path(a, b, via, 0.0107, 13.0);
  const PropagationPath ba = trace_path(b, a, via, 0.0107, 13.0);
  EXPECT_DOUBLE_EQ(ab.aod_az_deg, ba.aoa_az_deg);
  EXPECT_DOUBLE_EQ(ab.aod_el_deg, ba.aoa_el_deg);
  EXPECT_DOUBLE_EQ(ab.aoa_az_deg, ba.aod_az_deg);
  EXPECT_DOUBLE_EQ(ab.aoa_el_deg, ba.aod_el_deg);
}

TEST(Propagation, NoScatterersAndBlockedLosGivesNoPaths) {
  NetworkConfig cfg = desk_profile();
  cfg.n_scatterers = 0;
  cfg.los_block_distance_m = 1e-6;
  Deployment dep;
  dep.gnb_positions = {{0, 0, 6}};
  dep.gnb_panel_orientations = {panel_orientation(0)};
  dep.ue_positions = {{100, 0, 1.5}};
  dep.ue_panel_orientations = {panel_orientation(0)};
  const PropagationEnvironment env = generate_environment(dep, cfg);
  Rng rng = pair_rng(cfg, 0, 0, 0);
  EXPECT_TRUE(synthesize_paths(env, dep, 0, 0, cfg, rng).empty());
  EXPECT_THROW(synthesize_paths(env, dep, 1, 0, cfg, rng), ReferenceError);
}

TEST(Propagation, SynthesisIsDeterministicAndGeometric) {
  const NetworkConfig cfg = desk_profile();
  const Deployment dep = generate_deployment(cfg, 2);
  ASSERT_GT(dep.num_ues(), 1);
  const PropagationEnvironment env = generate_environment(dep, cfg);
  for (GnbId g = 0; g < dep.num_gnbs(); ++g)
    for (UeId u = 0; u < std::min(dep.num_ues(), 10); ++u) {
      Rng r1 = pair_rng(cfg, 2, g, u);
      Rng r2 = pair_rng(cfg, 2, g, u);
      const auto a = synthesize_paths(env, dep, g, u, cfg, r1);
      const auto b = synthesize_paths(env, dep, g, u, cfg, r2);
      EXPECT_EQ(a, b);
      for (const auto& p : a) {
        EXPECT_GT(std::abs(p.gain), 0.0);
        EXPECT_GE(p.aod_az_deg, -180.0);
        EXPECT_LT(p.aod_az_deg, 180.0);
        if (p.is_los()) continue;
        // Every reflection departs towards one of the shared scatterers.
        bool found = false;
        for (const auto& s : env.scatterers) {
          const Direction d = direction(dep.gnb_positions[g], s);
          found = found || (d.az_deg == p.aod_az_deg && d.el_deg == p.aod_el_deg);
        }
        EXPECT_TRUE(found);
      }
    }
}

TEST(Propagation, ScattererVisibilityDecaysWithDistance) {
  NetworkConfig cfg = desk_profile();
  cfg.n_scatterers = 20000;
  Deployment dep;
  dep.gnb_positions = {{125, 125, cfg.scatterer_max_height_m / 2}};
  dep.gnb_panel_orientations = {panel_orientation(0)};
  const PropagationEnvironment env = generate_environment(dep, cfg);
  int in_ring = 0, seen = 0;
  for (std::size_t s = 0; s < env.scatterers.size(); ++s) {
    const double d = distance(dep.gnb_positions[0], env.scatterers[s]);
    if (d < 90.0 || d > 110.0) continue;
    ++in_ring;
    seen += env.gnb_sees[0][s];
  }
  ASSERT_GT(in_ring, 1000);
  EXPECT_NEAR(static_cast<double>(seen) / in_ring, std::exp(-100.0 / cfg.los_block_distance_m), 0.04);
}

// ---------------------------------------------------------------------------

ArrayGeometry small_geometry() { return {panel_shape(16), panel_shape(4), 0.5}; }

TEST(Assembly, SingleBoresightPathIsRankOne) {
  const ArrayGeometry geo = small_geometry();
  PropagationPath p;
  p.gain = {1.0, 0.0};
  const MultiPanelChannel h =
      assemble_channel({p}, geo, panel_orientation(0.0), panel_orientation(0.0));
  const CMatrix b = h.block_matrix(0, 0);
  EXPECT_NEAR(b.norm(), std::sqrt(16.0 * 4.0), 1e-12);
  const CMatrix expected = std::sqrt(64.0) * ura_steering(geo.ue_panel, 0.5, 0, 0) *
                           ura_steering(geo.gnb_panel, 0.5, 0, 0).adjoint();
  EXPECT_NEAR((b - expected).norm(), 0.0, 1e-12);
  Eigen::JacobiSVD<CMatrix> svd(b);
  EXPECT_LT(svd.singularValues()(1), 1e-12 * svd.singularValues()(0));
  for (int pp = 0; pp < 4; ++pp)
    for (int q = 0; q < 4; ++q)
      if (pp != 0 || q != 0) { EXPECT_TRUE(h.block(pp, q).empty()); }
}

TEST(Assembly, EmptyPathListGivesZeroChannel) {
  const MultiPanelChannel h =
      assemble_channel({}, small_geometry(), panel_orientation(0.0), panel_orientation(0.0));
  EXPECT_TRUE(h.is_zero());
  EXPECT_EQ(h.dense().norm(), 0.0);
  EXPECT_EQ(h.dense().rows(), 16);
  EXPECT_EQ(h.dense().cols(), 64);
}

TEST(Assembly, PathOutsidePanelSectorIsGated) {
  PropagationPath p;
  p.gain = {1e-3, 0.0};
  p.aod_az_deg = 150.0;  // 60 deg off gNB panel 1, -30 deg off panel 2
  const MultiPanelChannel h =
      assemble_channel({p}, small_geometry(), panel_orientation(0.0), panel_orientation(0.0));
  EXPECT_TRUE(h.block(0, 1).empty());
  ASSERT_FALSE(h.block(0, 2).empty());
  const CVector expected_tx = ura_steering(panel_shape(16), 0.5, -30.0, 0.0);
  EXPECT_NEAR((h.block(0, 2).tx_steering.col(0) - expected_tx).norm(), 0.0, 1e-12);
}

TEST(Assembly, SectorEdgeBelongsToBothPanels) {
  PropagationPath p;
  p.gain = {1e-3, 0.0};
  p.aod_az_deg = 45.0;
  const MultiPanelChannel h =
      assemble_channel({p}, small_geometry(), panel_orientation(0.0), panel_orientation(0.0));
  EXPECT_FALSE(h.block(0, 0).empty());
  EXPECT_FALSE(h.block(0, 1).empty());
  p.aod_el_deg = 50.0;
  EXPECT_TRUE(assemble_channel({p}, small_geometry(), panel_orientation(0.0), panel_orientation(0.0))
                  .is_zero());
}

TEST(Assembly, BlockNormalizationUsesBlockPathCount) {
  PropagationPath a, b;
  a.gain = b.gain = {1.0, 0.0};
  b.aod_az_deg = 10.0;
  PropagationPath c = a;
  c.aod_az_deg = 100.0;  // lands in gNB panel 1 only
  const MultiPanelChannel h = assemble_channel({a, b, c}, small_geometry(), panel_orientation(0.0),
                                               panel_orientation(0.0));
  ASSERT_EQ(h.block(0, 0).num_paths(), 2);
  ASSERT_EQ(h.block(0, 1).num_paths(), 1);
  EXPECT_NEAR(std::abs(h.block(0, 0).coeffs(0)), std::sqrt(64.0 / 2.0), 1e-12);
  EXPECT_NEAR(std::abs(h.block(0, 1).coeffs(0)), std::sqrt(64.0), 1e-12);
}

TEST(Assembly, FactoredOperationsMatchDenseMatrix) {
  const NetworkConfig cfg = desk_profile();
  const Realization r = build_realization(cfg, 0);
  const MultiPanelChannel* h = nullptr;
  for (const auto& row : r.channels)
    for (const auto& ch : row)
      if (!h && ch.exact_paths.size() > 2) h = &ch;
  ASSERT_NE(h, nullptr);
  const CMatrix dense = h->dense();
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int p = 0; p < 4; ++p) {
    CVector wc(h->n_r);
    for (int i = 0; i < h->n_r; ++i) wc(i) = {n(rng), n(rng)};
    CVector full = CVector::Zero(4 * h->n_r);
    full.segment(p * h->n_r, h->n_r) = wc;
    const CRowVector expected = full.adjoint() * dense;
    EXPECT_NEAR((h->combine(p, wc) - expected).norm(), 0.0, 1e-12 * (1.0 + expected.norm()));
    for (int q = 0; q < 4; ++q) {
      CVector wp(h->n_t);
      for (int i = 0; i < h->n_t; ++i) wp(i) = {n(rng), n(rng)};
      const Complex direct = (wc.adjoint() * h->block_matrix(p, q) * wp)(0, 0);
      EXPECT_NEAR(std::abs(h->response(p, wc, q, wp) - direct), 0.0, 1e-12 * (1.0 + std::abs(direct)));
    }
  }
}

}  // namespace
}  // namespace hbf
