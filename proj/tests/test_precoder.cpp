// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

#include <gtest/gtest.h>

namespace hbf {
namespace {

using test::beam_azimuth;
using test::make_path;

FullCodebook gnb_book() {
  return full_codebook(std::make_shared<const SectorCodebook>(build_sector_codebook(3, 16)),
                       panel_orientation(0));
}

BeamPairLink link_on(UeId ue, BeamId beam) {
  BeamPairLink l;
  l.ue = ue;
  l.gnb = 0;
  l.gnb_beam = beam;
  return l;
}

TEST(RfStage, ColumnsAreBeamEmbeddings) {
  const FullCodebook book = gnb_book();
  const std::vector<BeamPairLink> links = {link_on(0, 2 * 8 + 3)};
  const CMatrix w = rf_stage(links, book, 4, 16);
  ASSERT_EQ(w.cols(), 1);
  EXPECT_NEAR((w.col(0) - book.embed(19)).norm(), 0.0, 0.0);
  EXPECT_EQ(w.col(0).segment(0, 32).norm(), 0.0);
  EXPECT_EQ(w.col(0).segment(48, 16).norm(), 0.0);
}

TEST(RfStage, DuplicateBeamsAllowedButSingular) {
  const FullCodebook book = gnb_book();
  const std::vector<BeamPairLink> links = {link_on(0, 5), link_on(1, 5)};
  const CMatrix w = rf_stage(links, book, 4, 16);
  EXPECT_EQ(w.col(0), w.col(1));
  CMatrix h(2, 2);
  h << Complex(1, 0), Complex(1, 0), Complex(2, 0), Complex(2, 0);
  EXPECT_THROW(zero_forcing(h, {0, 1}), RankDeficiencyError);
}

TEST(RfStage, PanelBudgetEnforced) {
  const FullCodebook book = gnb_book();
  std::vector<BeamPairLink> links;
  for (int i = 0; i < 4; ++i) links.push_back(link_on(i, 8 + i));
  EXPECT_NO_THROW(rf_stage(links, book, 4, 16));
  links.push_back(link_on(4, 8 + 4));
  EXPECT_THROW(rf_stage(links, book, 4, 16), CapacityError);
  links.pop_back();
  EXPECT_THROW(rf_stage(links, book, 4, 3), CapacityError);
  links.push_back(link_on(9, 0));
  links.back().gnb = 1;
  EXPECT_THROW(rf_stage(links, book, 4, 16), ContractViolation);
}

TEST(ZeroForcing, TwoByTwoWorkedExample) {
  CMatrix h(2, 2);
  h << 1.0, 0.5, 0.5, 1.0;
  const CMatrix w = zero_forcing(h);
  CMatrix expected(2, 2);
  expected << 1.0, -0.5, -0.5, 1.0;
  expected /= 0.75;
  EXPECT_NEAR((w - expected).norm(), 0.0, 1e-12);
  EXPECT_NEAR((h * w - CMatrix::Identity(2, 2)).norm(), 0.0, 1e-12);
}

TEST(ZeroForcing, IdentityStaysIdentity) {
  EXPECT_NEAR((zero_forcing(CMatrix::Identity(3, 3)) - CMatrix::Identity(3, 3)).norm(), 0.0, 1e-14);
}

TEST(ZeroForcing, WideAggregateUsesRightInverse) {
  Rng rng(4);
  std::normal_distribution<double> n;
  CMatrix h(3, 7);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = {n(rng), n(rng)};
  const CMatrix w = zero_forcing(h);
  EXPECT_NEAR((h * w - CMatrix::Identity(3, 3)).norm(), 0.0, 1e-12);
  const CMatrix closed = h.adjoint() * (h * h.adjoint()).inverse();
  EXPECT_NEAR((w - closed).norm(), 0.0, 1e-10);
  EXPECT_THROW(zero_forcing(CMatrix::Ones(3, 2)), RankDeficiencyError);
}

TEST(ZeroForcing, ConditionGuard) {
  CMatrix h(2, 2);
  h << 1.0, 0.0, 0.0, 1e-13;
  try {
    zero_forcing(h, {4, 9});
    FAIL() << "expected rank deficiency";
  } catch (const RankDeficiencyError& e) {
    EXPECT_EQ(e.ues(), (std::vector<UeId>{4, 9}));
    EXPECT_GT(e.condition(), kMaxConditionNumber);
  }
  h(1, 1) = 1e-11;
  EXPECT_NO_THROW(zero_forcing(h));
}

TEST(ZfStage, SingleUeDegeneratesToBeamSteering) {
  const FullCodebook book = gnb_book();
  const std::vector<BeamPairLink> links = {link_on(0, 6)};
  const CMatrix w_rf = rf_stage(links, book, 4, 16);
  const std::vector<EffectiveChannel> rows = {{CRowVector::Constant(1, Complex(0.3, -0.4)), 0}};
  const CMatrix w = compose(w_rf, zf_stage(rows, w_rf));
  EXPECT_NEAR(w.col(0).norm(), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(w.col(0).dot(w_rf.col(0))), 1.0, 1e-12);
}

TEST(ZfStage, NormalizedColumnsNullCoScheduledUes) {
  const FullCodebook book = gnb_book();
  const std::vector<BeamPairLink> links = {link_on(0, 2), link_on(1, 11)};
  const CMatrix w_rf = rf_stage(links, book, 4, 16);
  CMatrix hbar(2, 2);
  hbar << 1.0, 0.5, 0.5, 1.0;
  const std::vector<EffectiveChannel> rows = {{hbar.row(0), 0}, {hbar.row(1), 1}};
  const CMatrix w_bb = zf_stage(rows, w_rf);
  const CMatrix w = compose(w_rf, w_bb);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(w.col(i).norm(), 1.0, 1e-9);
  const CMatrix g = hbar * w_bb;
  EXPECT_NEAR(std::abs(g(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(g(1, 0)), 0.0, 1e-15);
  EXPECT_GT(std::abs(g(0, 0)), 0.0);
}

TEST(Compose, IdentityBasebandKeepsRf) {
  const FullCodebook book = gnb_book();
  const std::vector<BeamPairLink> links = {link_on(0, 1), link_on(1, 20)};
  const CMatrix w_rf = rf_stage(links, book, 4, 16);
  EXPECT_EQ(compose(w_rf, CMatrix::Identity(2, 2)), w_rf);
  EXPECT_THROW(compose(w_rf, CMatrix::Identity(3, 3)), ContractViolation);
}

TEST(Digital, SingleUeIsMatchedFilter) {
  Rng rng(9);
  std::normal_distribution<double> n;
  CMatrix row(1, 64);
  for (Eigen::Index i = 0; i < row.size(); ++i) row.data()[i] = {n(rng), n(rng)};
  const CMatrix w = dbf_precoder(row);
  const CVector mf = row.row(0).adjoint() / row.norm();
  EXPECT_NEAR((w.col(0) - mf).norm(), 0.0, 1e-12);
  // No unit-norm beam beats the matched filter, codebook beams included.
  const FullCodebook book = gnb_book();
  const double best = std::norm((row * w)(0, 0));
  for (BeamId b = 0; b < book.size(); ++b)
    EXPECT_LE(std::norm((row * book.embed(b))(0, 0)), best * (1 + 1e-12));
}

TEST(Digital, OrthogonalUesGetMatchedFilters) {
  CMatrix rows = CMatrix::Zero(2, 8);
  rows(0, 0) = {1.0, 1.0};
  rows(0, 1) = {0.5, 0.0};
  rows(1, 5) = {0.0, -2.0};
  const CMatrix w = dbf_precoder(rows);
  for (int i = 0; i < 2; ++i) {
    const CVector mf = rows.row(i).adjoint() / rows.row(i).norm();
    EXPECT_NEAR(std::abs(w.col(i).dot(mf)), 1.0, 1e-12);
  }
}

TEST(Digital, IdenticalRowsAreRankDeficient) {
  CMatrix rows(2, 8);
  rows.row(0).setConstant(Complex(0.2, 0.1));
  rows.row(1) = rows.row(0);
  EXPECT_THROW(dbf_precoder(rows, {0, 1}), RankDeficiencyError);
}

TEST(Penalty, CorrelationShrinksReceivedSignal) {
  // Two unit rows with correlation rho; after ZF and per-column
  // normalization the own-stream gain is sqrt(1 - rho^2).
  double prev = std::numeric_limits<double>::infinity();
  for (double rho = 0.0; rho <= 0.99 + 1e-12; rho += 0.09) {
    CMatrix rows = CMatrix::Zero(2, 4);
    rows(0, 0) = 1.0;
    rows(1, 0) = rho;
    rows(1, 1) = std::sqrt(1 - rho * rho);
    const CMatrix w = dbf_precoder(rows);
    const double own0 = std::norm((rows.row(0) * w.col(0))(0, 0));
    const double own1 = std::norm((rows.row(1) * w.col(1))(0, 0));
    EXPECT_NEAR(own0, 1 - rho * rho, 1e-12);
    EXPECT_NEAR(own1, 1 - rho * rho, 1e-12);
    EXPECT_LT(own0, prev + 1e-15);
    prev = own0;
  }
}

TEST(BuildPrecoder, PowerSplitAndUnitColumns) {
  NetworkConfig cfg = test::tiny_config();
  PathMap paths;
  for (int u = 0; u < 3; ++u)
    paths[{0, u}] = {make_path(beam_azimuth(3, u, 2 + u), beam_azimuth(3, 0, 1 + 2 * u), 1e-4)};
  const Realization r = make_realization(cfg, test::manual_deployment(1, 3), paths);
  const LinkEvaluator ev(r);
  std::vector<BeamPairLink> links;
  for (int u = 0; u < 3; ++u) links.push_back(r.sweeps[u].front());
  for (Precoding p : {Precoding::kHybrid, Precoding::kDigital}) {
    const GnbPrecoderState s = build_precoder(ev, 0, links, p);
    EXPECT_EQ(s.num_served(), 3);
    EXPECT_NEAR(s.p_per_ue * 3, cfg.p_max_w(), 1e-15);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.w_combined.col(i).norm(), 1.0, 1e-9);
    EXPECT_EQ(s.column_of(2), 2);
    EXPECT_EQ(s.column_of(7), -1);
  }
  EXPECT_THROW(build_precoder(ev, 0, links, Precoding::kAnalog), ContractViolation);
  const GnbPrecoderState a = build_precoder(ev, 0, std::span(links).first(1), Precoding::kAnalog);
  EXPECT_EQ(a.w_combined, r.gnb_books[0].embed(links[0].gnb_beam));
  EXPECT_DOUBLE_EQ(a.p_per_ue, cfg.p_max_w());
}

TEST(BuildPrecoder, QuantizedCsiLeavesResidualOnTrueChannel) {
  NetworkConfig cfg = desk_profile();
  cfg.fixed_ue_count = 40;
  cfg.n_q_csi_bits = 4;
  int groups = 0;
  double residual = 0.0;
  for (int id = 0; id < 3; ++id) {
    const Realization r = build_realization(cfg, id);
    const LinkEvaluator ev(r);
    const Allocation a = allocate(ev, AllocMode::kFiveGNr);
    for (GnbId g = 0; g < r.num_gnbs(); ++g) {
      if (a.per_gnb[g].size() < 2) continue;
      ++groups;
      const GnbPrecoderState s = build_precoder(ev, g, a.per_gnb[g], Precoding::kHybrid);
      for (int c = 0; c < s.num_served(); ++c) {
        const auto& l = a.per_gnb[g][c];
        residual += intra_interference(ev.true_row(l.ue, l.ue_beam, g), s, c);
      }
    }
  }
  ASSERT_GT(groups, 0);
  EXPECT_GT(residual, 0.0);
}

}  // namespace
}  // namespace hbf
