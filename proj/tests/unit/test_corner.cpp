#include <gtest/gtest.h>

#include <cmath>

#include "corpus.hpp"
#include "rflow/corner.hpp"
#include "rflow/mass.hpp"

using namespace rflow;

namespace {

// H of the sphere r0 seen from one side, from the closed-form profile with a
// one-sided Richardson difference for B'.
double profile_mean_curvature(const CornerMetric& cm, double side) {
  const auto& p = *cm.metric.profile;
  const double r0 = cm.r0;
  auto d = [&](double h) { return (p.B(r0 + side * h) - p.B(r0)) / (side * h); };
  const double h = 1e-4;
  const double dB = (8.0 * d(h / 4) - 6.0 * d(h / 2) + d(h)) / 3.0;
  const double A = p.A(r0), B = p.B(r0);
  return (cm.n() - 1) * (1.0 / r0 + dB / (2.0 * B)) / std::sqrt(A);
}

}  // namespace

TEST(Corner, ConditionMatchesJumpFormulaAndProfileOracle) {
  for (double s : {0.1, 0.3}) {
    const auto cm = schwarzschild_corner(s);
    const auto c = corner_condition(cm);
    EXPECT_TRUE(c.satisfied);
    const double A = cm.metric.A[cm.i0], B = cm.metric.B[cm.i0];
    EXPECT_NEAR(c.H_minus - c.H_plus, (cm.n() - 1) * s / (2.0 * std::sqrt(A) * B), 1e-6);
    EXPECT_NEAR(c.H_minus, profile_mean_curvature(cm, -1.0), 1e-6);
    EXPECT_NEAR(c.H_plus, profile_mean_curvature(cm, 1.0), 1e-6);
  }
}

TEST(Corner, SmoothMetricHasNoJump) {
  const auto cm = schwarzschild_corner(0.0);
  const auto c = corner_condition(cm);
  EXPECT_TRUE(c.satisfied);
  EXPECT_LT(std::abs(c.H_minus - c.H_plus), 1e-8);
}

TEST(Corner, NegativeStrengthViolatesCondition) {
  const auto c = corner_condition(schwarzschild_corner(-0.3));
  EXPECT_FALSE(c.satisfied);
  EXPECT_LT(c.H_minus, c.H_plus);
}

TEST(Corner, PiecesRoundTripAndDiscontinuityIsRejected) {
  const auto cm = schwarzschild_corner(0.1);
  const auto joined = corner_from_pieces(cm.inner(), cm.outer());
  ASSERT_EQ(joined.metric.size(), cm.metric.size());
  EXPECT_EQ(joined.i0, cm.i0);
  EXPECT_NEAR(corner_condition(joined).H_minus, corner_condition(cm).H_minus, 1e-6);
  auto outer = cm.outer();
  for (auto& b : outer.B) b *= 1.001;
  EXPECT_THROW(corner_from_pieces(cm.inner(), outer), ConfigError);
}

TEST(Corner, OffNodeRadiusIsRejected) {
  const auto base = build_schwarzschild_isotropic(1.0, rflow::testing::exterior_grid(256));
  EXPECT_THROW(corner_example(base, 4.0, 0.1, rflow::testing::center_grid(512)), ConfigError);
}

TEST(Corner, StrengthBeyondRegularInteriorBoundMakesBulkCurvatureNegative) {
  // the regular interior needs b_in >= 0; s = 0.3 overshoots it
  const auto cm = schwarzschild_corner(0.3);
  EXPECT_LT(cm.interior_flux, 0.0);
  const auto R = scalar_curvature(cm.metric);
  double inner_min = 0.0;
  for (std::size_t i = 0; i + 10 < cm.i0; ++i) inner_min = std::min(inner_min, R[i]);
  EXPECT_LT(inner_min, -1.0);
  EXPECT_GT(schwarzschild_corner(0.1).interior_flux, 0.0);
}

TEST(Mollify, SmoothCornerIsUntouched) {
  const auto cm = schwarzschild_corner(0.0);
  const auto m = mollify(cm, 0.01);
  EXPECT_TRUE(m.report.satisfied);
  EXPECT_EQ(m.report.neg_part, 0.0);
  double dev = 0.0;
  for (std::size_t i = 0; i < cm.metric.size(); ++i) {
    dev = std::max({dev, std::abs(m.metric.A[i] - cm.metric.A[i]), std::abs(m.metric.B[i] - cm.metric.B[i])});
  }
  EXPECT_LT(dev, 1e-12);
}

TEST(Mollify, ValidLadderPassesWithOneK) {
  const auto cm = schwarzschild_corner(0.1, 1e-3);
  double K = 0.0;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto m = mollify(cm, eps);
    const auto& r = m.report;
    EXPECT_TRUE(r.satisfied) << "eps " << eps;
    EXPECT_LT(r.neg_part, eps);
    EXPECT_GE(r.sandwich_min, 1.0 - eps);
    EXPECT_LE(r.sandwich_max, 1.0 + eps);
    EXPECT_LE(r.support_deviation, 1e-14);
    EXPECT_LE(r.sigma, eps);
    K = std::max(K, -r.K_measured);
  }
  EXPECT_LT(K, 10.0);
}

TEST(Mollify, InvalidCornerKeepsNegativeFloor) {
  const auto cm = schwarzschild_corner(-0.1, 1e-3);
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto m = mollify(cm, eps);
    EXPECT_FALSE(m.report.satisfied);
    EXPECT_GT(m.report.neg_part, 1.0) << "eps " << eps;
  }
}

TEST(Mollify, CollarIsExactAndSupportIsCompact) {
  const auto cm = schwarzschild_corner(0.1);
  const double sigma = 0.02;
  const auto g = detail::mollify_with(cm, sigma);
  for (std::size_t i = 0; i < cm.metric.size(); ++i) {
    if (std::abs(cm.metric.g()[i] - cm.r0) >= 0.5 * sigma) {
      EXPECT_EQ(g.A[i], cm.metric.A[i]);
      EXPECT_EQ(g.B[i], cm.metric.B[i]);
    }
  }
  // the smoothed kink lies below the corner (concave kink, s > 0)
  EXPECT_LT(g.B[cm.i0], cm.metric.B[cm.i0]);
}

TEST(Mollify, SmoothedAbsoluteValueMatchesClosedForm) {
  // (K * |.|)(0) for K = (35/32)(1 - x^2)^3 on the unit interval is 2 * 35/32 * int_0^1 x (1-x^2)^3 dx = 35/128
  EXPECT_NEAR(detail::smoothed_abs_excess(0.0, 1.0), 35.0 / 128.0, 1e-14);
  EXPECT_NEAR(detail::smoothed_abs_excess(0.3, 2.0), 2.0 * detail::smoothed_abs_excess(0.15, 1.0), 1e-14);
  EXPECT_EQ(detail::smoothed_abs_excess(1.0, 1.0), 0.0);
}

TEST(Mollify, MassIsUnchangedBySmoothing) {
  const auto cm = schwarzschild_corner(0.1);
  const std::vector<double> radii{50.0, 100.0, 200.0};
  const double m_corner = adm_mass(cm.metric, radii).mass;
  const double m_outer = adm_mass(cm.outer(), radii).mass;
  EXPECT_NEAR(m_corner, m_outer, 1e-10 * m_outer);
  for (double eps : {1e-1, 1e-2}) {
    EXPECT_NEAR(adm_mass(mollify(cm, eps).metric, radii).mass, m_outer, 1e-10 * m_outer);
  }
  EXPECT_NEAR(m_outer, 16.0 * M_PI, 1e-3 * 16.0 * M_PI);
}

TEST(NegativePart, AgreesWithMaskedQuadratureOnInvalidCorner) {
  const auto cm = schwarzschild_corner(-0.3);
  const auto g = detail::mollify_with(cm, 0.1);
  const auto np = negative_part(g);
  EXPECT_GT(np.value, 1.0);
  EXPECT_NEAR(np.value, np.masked, 1e-4 * np.masked);
}

TEST(NegativePart, VanishesForNonNegativeCurvature) {
  const auto flat = build_flat(3, rflow::testing::center_grid(512));
  EXPECT_LT(negative_part(flat).value, 1e-8);
  const auto cm = schwarzschild_corner(0.1);
  EXPECT_EQ(negative_part(mollify(cm, 0.1).metric).value, 0.0);
}
