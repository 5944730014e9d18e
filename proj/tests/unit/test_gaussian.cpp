#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oemsim/gaussian.hpp"
#include "oemsim/verify.hpp"

using namespace oemsim;

namespace {

Eigen::Matrix2d rotation(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

/// Random physical two-mode Gaussian state: S diag(nu) S^T with nu >= 1/2 and
/// S a product of local rotations, local squeezers and a two-mode squeezer.
BipartiteCM random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2 * constants::pi);
  std::uniform_real_distribution<double> sq(-1.0, 1.0);
  std::uniform_real_distribution<double> occ(0.0, 3.0);
  std::uniform_real_distribution<double> r2(0.0, 1.5);

  Eigen::Matrix4d v = Eigen::Matrix4d::Zero();
  v(0, 0) = v(1, 1) = 0.5 + occ(rng);
  v(2, 2) = v(3, 3) = 0.5 + occ(rng);

  const double r = r2(rng);
  Eigen::Matrix4d tms;
  const double c = std::cosh(r), s = std::sinh(r);
  tms << c, 0, s, 0, 0, c, 0, -s, s, 0, c, 0, 0, -s, 0, c;

  Eigen::Matrix4d local = Eigen::Matrix4d::Zero();
  Eigen::Matrix2d s1 = Eigen::Vector2d(std::exp(sq(rng)), std::exp(-sq(rng))).asDiagonal();
  s1(1, 1) = 1.0 / s1(0, 0);
  Eigen::Matrix2d s2 = Eigen::Vector2d(std::exp(sq(rng)), 1.0).asDiagonal();
  s2(1, 1) = 1.0 / s2(0, 0);
  local.topLeftCorner<2, 2>() = rotation(angle(rng)) * s1;
  local.bottomRightCorner<2, 2>() = rotation(angle(rng)) * s2;

  const Eigen::Matrix4d sym = local * tms;
  return BipartiteCM::from_full(sym * v * sym.transpose());
}

} // namespace

TEST(ParsePair, TagsAndKeys) {
  EXPECT_EQ(parse_pair("MR-OC"), BipartitePair::mr_oc);
  EXPECT_EQ(parse_pair("mr_mc"), BipartitePair::mr_mc);
  EXPECT_EQ(parse_pair("oc-mc"), BipartitePair::oc_mc);
  EXPECT_EQ(parse_pair("OC-SBA"), BipartitePair::oc_sba);
  EXPECT_EQ(parse_pair("OC_SCB"), BipartitePair::oc_scb);
  EXPECT_FALSE(parse_pair("MR-SBA"));
  EXPECT_FALSE(parse_pair(""));
}

TEST(ExtractBipartite, IndexRanges) {
  Eigen::Matrix<double, 10, 10> v;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      v(i, j) = 10 * i + j;
  const auto mr_oc = extract_bipartite(v, BipartitePair::mr_oc).full();
  const auto oc_scb = extract_bipartite(v, BipartitePair::oc_scb).full();
  const int rows_mr_oc[] = {0, 1, 2, 3};
  const int rows_oc_scb[] = {2, 3, 8, 9};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      // full() mirrors the upper correlation block, so compare the upper triangle
      if (i <= j || (i < 2 && j < 2) || (i >= 2 && j >= 2)) {
        EXPECT_EQ(mr_oc(i, j), v(rows_mr_oc[i], rows_mr_oc[j]));
        EXPECT_EQ(oc_scb(i, j), v(rows_oc_scb[i], rows_oc_scb[j]));
      }
    }
  const auto mr_mc = extract_bipartite(v, BipartitePair::mr_mc);
  EXPECT_EQ(mr_mc.vc(0, 0), v(0, 4));
  const auto oc_sba = extract_bipartite(v, BipartitePair::oc_sba);
  EXPECT_EQ(oc_sba.v2(1, 1), v(7, 7));
}

TEST(ExtractBipartite, VacuumRestriction) {
  const Eigen::Matrix<double, 10, 10> v = 0.5 * Eigen::Matrix<double, 10, 10>::Identity();
  for (const auto& e : pair_table)
    EXPECT_EQ(extract_bipartite(v, e.pair).full(), 0.5 * Eigen::Matrix4d::Identity());
}

TEST(ExtractBipartite, AtomicPairDoesNotFitSixModes) {
  const Eigen::Matrix<double, 6, 6> v = 0.5 * Eigen::Matrix<double, 6, 6>::Identity();
  EXPECT_NO_THROW(extract_bipartite(v, BipartitePair::oc_mc));
  EXPECT_THROW(extract_bipartite(v, BipartitePair::oc_sba), DomainError);
}

TEST(LogNegativity, VacuumIsExactlyZero) {
  const auto r = log_negativity(verify::make_tmsv(0.0));
  EXPECT_EQ(r.e_n, 0.0);
  EXPECT_NEAR(r.eta_minus, 0.5, 1e-15);
}

TEST(LogNegativity, TwoModeSqueezedVacuum) {
  for (const double r : {0.5, 1.0, 2.0}) {
    const auto ln = log_negativity(verify::make_tmsv(r));
    EXPECT_NEAR(ln.e_n, 2 * r, 1e-9) << "r = " << r;
    EXPECT_NEAR(ln.eta_minus / (0.5 * std::exp(-2 * r)), 1.0, 1e-9);
  }
}

TEST(LogNegativity, ThermalTwoModeSqueezed) {
  // eta^- = (2n+1) e^{-2r} / 2
  const double r = 1.0, n = 0.7;
  const auto ln = log_negativity(verify::make_tmsv(r, n));
  EXPECT_NEAR(ln.e_n, 2 * r - std::log(2 * n + 1), 1e-9);
}

TEST(LogNegativity, ThermalProductsAreSeparable) {
  for (const double n : {0.0, 0.3, 3.0, 1e3}) {
    EXPECT_EQ(log_negativity(verify::make_tmsv(0.0, n)).e_n, 0.0);
    BipartiteCM cm;
    cm.v1 = (n + 0.5) * Eigen::Matrix2d::Identity();
    cm.v2 = (2 * n + 0.5) * Eigen::Matrix2d::Identity();
    cm.vc.setZero();
    EXPECT_EQ(log_negativity(cm).e_n, 0.0);
  }
}

TEST(LogNegativity, NonPhysicalInputIsAnError) {
  BipartiteCM cm;
  cm.v1 << 1.0, 0.0, 0.0, -1.0;
  cm.v2 = 0.5 * Eigen::Matrix2d::Identity();
  cm.vc.setZero();
  EXPECT_THROW(log_negativity(cm), NonPhysicalError);
  cm.v1(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(log_negativity(cm), NonPhysicalError);
}

TEST(LogNegativity, LocalRotationInvariance) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> angle(0.0, 2 * constants::pi);
  for (int k = 0; k < 200; ++k) {
    const auto cm = random_state(rng);
    Eigen::Matrix4d rot = Eigen::Matrix4d::Zero();
    rot.topLeftCorner<2, 2>() = rotation(angle(rng));
    rot.bottomRightCorner<2, 2>() = rotation(angle(rng));
    const auto rotated = BipartiteCM::from_full(rot * cm.full() * rot.transpose());
    EXPECT_NEAR(log_negativity(rotated).e_n, log_negativity(cm).e_n, 1e-10);
  }
}

TEST(LogNegativity, ModeSwapSymmetry) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    const auto cm = random_state(rng);
    const BipartiteCM swapped{cm.v2, cm.v1, cm.vc.transpose()};
    EXPECT_NEAR(log_negativity(swapped).e_n, log_negativity(cm).e_n, 1e-10);
  }
}

TEST(LogNegativity, ThresholdConsistency) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 500; ++k) {
    const auto ln = log_negativity(random_state(rng));
    EXPECT_EQ(ln.e_n > 0.0, ln.eta_minus < 0.5 - 1e-12);
    EXPECT_GE(ln.e_n, 0.0);
  }
}

TEST(LogNegativity, ContinuousUnderSmallPerturbation) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 50; ++k) {
    const auto cm = random_state(rng);
    const double base = log_negativity(cm).e_n;
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) {
        Eigen::Matrix4d m = cm.full();
        m(i, j) += 1e-8;
        if (i != j)
          m(j, i) += 1e-8;
        EXPECT_LE(std::abs(log_negativity(BipartiteCM::from_full(m)).e_n - base), 1e-5);
      }
  }
}
