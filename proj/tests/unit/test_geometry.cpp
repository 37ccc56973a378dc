#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "corpus.hpp"
#include "rflow/curvature.hpp"
#include "rflow/mass.hpp"
#include "rflow/norms.hpp"
#include "rflow/oracle.hpp"
#include "rflow/verify.hpp"

using namespace rflow;
using rflow::testing::center_grid;
using rflow::testing::exterior_grid;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace

TEST(Grid, Invariants) {
  EXPECT_THROW(RadialGrid::uniform(0.0, 1.0, 10), ConfigError);
  const auto g = RadialGrid::center_sinh(0.01, 2000.0, 2048);
  EXPECT_TRUE(g.center_regular());
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
  EXPECT_NEAR(g.r_max(), 2000.0, 1e-9);
  EXPECT_NEAR(rho(0.5), 1.0, 0.0);
  EXPECT_NEAR(rho(3.0), 3.0, 0.0);
  EXPECT_GE(rho(1.5), 1.0);
}

TEST(Grid, ClusteredHitsFeature) {
  const auto g = RadialGrid::clustered(1.0, 1000.0, 4.0, 1e-3, 0.01);
  EXPECT_NEAR(g.r_min(), 1.0, 1e-12);
  EXPECT_NEAR(g[g.feature_index()], 4.0, 1e-12);
  EXPECT_NEAR(g.spacing(g.feature_index()), 1e-3, 1e-4);
}

TEST(Grid, CollarPlacesFeatureOnNodeAndResolvesIt) {
  const auto g = RadialGrid::collar(4.0, 5e-4, 0.06, 2000.0);
  EXPECT_TRUE(g.center_regular());
  EXPECT_EQ(g[g.feature_index()], 4.0);
  EXPECT_NEAR(g.spacing(g.feature_index()), 5e-4, 5e-5);
  EXPECT_GE(g.r_max(), 2000.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
  // even rational test function, second derivative through the transitions
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = 1.0 / (1.0 + g[i] * g[i]);
  const auto d = differentiate(g, f);
  double err = 0.0;
  for (std::size_t i = 0; i + 3 < g.size(); ++i) {
    const double r = g[i], q = 1.0 + r * r;
    err = std::max(err, std::abs(d.d2[i] - (6.0 * r * r - 2.0) / (q * q * q)));
  }
  EXPECT_LT(err, 1e-7);
  EXPECT_THROW(RadialGrid::collar(1.0, 1e-3, 0.06, 100.0), ConfigError);
}

TEST(Grid, CenterClusteredIsUniformUpToFeature) {
  const auto g = RadialGrid::center_clustered(4.0, 2.5e-3, 5.0, 2000.0);
  const std::size_t i = g.nearest_index(4.0);
  EXPECT_NEAR(g[i], 4.0, 1e-12);
  EXPECT_NEAR(g.spacing(0), g.spacing(i), 1e-12);
  EXPECT_GE(g.r_max(), 2000.0);
}

TEST(Stencil, FourthOrderOnMappedGrid) {
  double prev = 0.0;
  for (std::size_t n : {256u, 512u}) {
    const auto g = RadialGrid::geometric(1.0, 50.0, n);
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = std::sin(g[i]) / g[i];
    const auto d = differentiate(g, f);
    double err = 0.0;
    for (std::size_t i = 4; i + 4 < n; ++i) {
      const double r = g[i];
      const double exact = std::cos(r) / r - std::sin(r) / (r * r);
      err = std::max(err, std::abs(d.d1[i] - exact));
    }
    if (prev > 0.0) EXPECT_GT(prev / err, 12.0);
    prev = err;
  }
}

TEST(Flat, ZeroCurvatureAndMass) {
  for (int n : {3, 4, 5}) {
    const auto m = build_flat(n, center_grid(512, 500.0));
    for (double v : scalar_curvature(m)) EXPECT_EQ(v, 0.0);
    for (double v : ricci_norm_sq(m)) EXPECT_EQ(v, 0.0);
    EXPECT_NEAR(adm_mass(m, {50, 100, 200}).mass, 0.0, 1e-10);
  }
}

TEST(Flat, MeanCurvatureOfRoundSphere) {
  for (int n : {3, 4, 5}) {
    const auto m = build_flat(n, center_grid(512, 500.0));
    for (double r0 : {2.0, 3.0, 7.5}) EXPECT_DOUBLE_EQ(mean_curvature_sphere(m, r0), (n - 1) / r0);
  }
  const auto m3 = build_flat(3, center_grid(512, 500.0));
  EXPECT_DOUBLE_EQ(mean_curvature_sphere(m3, 2.0), 1.0);
  const auto m4 = build_flat(4, center_grid(512, 500.0));
  EXPECT_DOUBLE_EQ(mean_curvature_sphere(m4, 3.0), 1.0);
}

TEST(Schwarzschild, ClosedFormValues) {
  const auto m = build_schwarzschild_isotropic(1.0, exterior_grid());
  const double r = 100.0;
  EXPECT_NEAR(m.profile->A(r), std::pow(1.005, 4), 1e-15);
  EXPECT_NEAR(m.profile->A(r), 1.02015050, 1e-8);
  EXPECT_THROW(build_schwarzschild_isotropic(1.0, exterior_grid(), 4), ConfigError);
  EXPECT_THROW(build_schwarzschild_isotropic(1.0, center_grid()), ConfigError);
  EXPECT_EQ(build_schwarzschild_isotropic(0.0, exterior_grid()).name, "flat");
}

TEST(Schwarzschild, ScalarFlatWithSecondOrderError) {
  double prev = 0.0;
  for (std::size_t n : {512u, 1024u, 2048u}) {
    const auto m = build_schwarzschild_isotropic(1.0, exterior_grid(n, 1.0, 4000.0));
    const auto R = scalar_curvature(m);
    double err = 0.0;
    for (std::size_t i = 2; i + 2 < R.size(); ++i) err = std::max(err, std::abs(R[i]));
    if (prev > 0.0) EXPECT_GT(prev / err, 3.5);
    prev = err;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(Schwarzschild, FluxClosedForm) {
  const auto m = build_schwarzschild_isotropic(1.0, exterior_grid());
  for (double r : {50.0, 100.0, 200.0}) {
    EXPECT_NEAR(adm_mass_flux(m, r) / (16 * kPi * std::pow(1 + 0.5 / r, 3)), 1.0, 1e-9);
  }
  const auto rep = adm_mass(m, {50, 100, 200});
  EXPECT_NEAR(rep.mass / (16 * kPi), 1.0, 1e-3);
  EXPECT_TRUE(rep.converged);
  EXPECT_TRUE(rep.monotone);
  EXPECT_GT(rep.lambda_fit, 0.5);
}

TEST(Schwarzschild, RicciDecaysLikeInverseSixthPower) {
  const auto m = build_schwarzschild_isotropic(1.0, exterior_grid());
  const auto Q = ricci_norm_sq(m);
  const std::size_t a = m.g().nearest_index(100.0), b = m.g().nearest_index(1000.0);
  for (std::size_t i = a; i <= b; i += 50) EXPECT_GT(Q[i], 0.0);
  const double slope = std::log(Q[b] / Q[a]) / std::log(m.g()[b] / m.g()[a]);
  EXPECT_NEAR(slope, -6.0, 0.2);
}

TEST(Oracle, EquivalenceOnCorpus) {
  for (const auto& entry : verification_corpus()) {
    const auto& m = entry.metric;
    const auto R = scalar_curvature(m);
    const auto Q = ricci_norm_sq(m);
    oracle::Evaluator ev(oracle::cartesian(*m.profile, m.n), m.n);
    for (std::size_t i = 4; i + 4 < m.size(); i += m.size() / 23) {
      const double r = m.g()[i];
      const auto x = oracle::on_axis(m.n, r);
      EXPECT_LT(rel(R[i], ev.scalar_standard(x)), 1e-5) << entry.label << " r=" << r;
      EXPECT_LT(rel(Q[i], ev.ricci_norm_sq(x)), 1e-5) << entry.label << " r=" << r;
      EXPECT_LT(rel(mean_curvature_sphere(m, r), ev.mean_curvature(x)), 1e-5) << entry.label << " r=" << r;
    }
  }
}

TEST(Oracle, DivergenceFormMatchesStandardOffAxis) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int n : {3, 4, 5}) {
    const auto m = build_bump(n, 0.3, -0.2, 1.5, center_grid(256, 50.0));
    oracle::Evaluator ev(oracle::cartesian(*m.profile, n), n);
    for (int k = 0; k < 3; ++k) {
      oracle::Vec x(n);
      for (int j = 0; j < n; ++j) x(j) = u(rng);
      EXPECT_LT(rel(ev.scalar_divergence_form(x), ev.scalar_standard(x)), 1e-7);
    }
  }
}

TEST(Oracle, FluxQuadratureOnCorpus) {
  for (const auto& entry : verification_corpus()) {
    const auto& m = entry.metric;
    oracle::Evaluator ev(oracle::cartesian(*m.profile, m.n), m.n);
    for (double r : {20.0, 100.0}) {
      const double q = oracle::flux_quadrature(ev, r);
      EXPECT_LT(std::abs(adm_mass_flux(m, r) - q), 1e-6 * std::max(1.0, std::abs(q))) << entry.label;
    }
  }
}

TEST(Oracle, HarmonicAngularPerturbation) {
  // A = 1, B = 1 + c r^{2-n}: flux = omega_{n-1} (n-1)(n-3) c at every radius.
  for (int n : {3, 4}) {
    for (double c : {0.1, 0.2}) {
      Profile p{[](double) { return 1.0; }, [=](double r) { return 1.0 + c / std::pow(r, n - 2); }};
      const auto m = from_profile(exterior_grid(), n, p, n - 2.0, "harmonic-B");
      oracle::Evaluator ev(oracle::cartesian(p, n), n);
      const double r = 200.0;
      const double q = oracle::flux_quadrature(ev, r);
      const double expected = sphere_area(n) * (n - 1) * (n - 3) * c;
      EXPECT_NEAR(q, expected, 1e-6 * (1 + std::abs(expected)));
      EXPECT_NEAR(adm_mass_flux(m, r), q, 1e-6 * (1 + std::abs(q)));
      EXPECT_LT(std::abs(ev.scalar_standard(oracle::on_axis(n, 3.0))), c * c);
    }
  }
  // Scalar curvature of the harmonic angular perturbation is quadratic in c.
  auto R_at = [](double c) {
    Profile p{[](double) { return 1.0; }, [=](double r) { return 1.0 + c / r; }};
    return oracle::Evaluator(oracle::cartesian(p, 3), 3).scalar_standard(oracle::on_axis(3, 3.0));
  };
  EXPECT_NEAR(R_at(0.2) / R_at(0.1), 4.0, 0.5);
}

TEST(MassParts, SchwarzschildResidualDecays) {
  const auto m = build_schwarzschild_isotropic(1.0, exterior_grid());
  const double mass = 16 * kPi;
  const auto res = mass_parts_residuals(m, {50, 100, 200}, mass);
  EXPECT_LT(std::abs(res[2]), std::abs(res[1]));
  EXPECT_LT(std::abs(res[1]), std::abs(res[0]));
  const double slope = std::log(std::abs(res[2] / res[0])) / std::log(4.0);
  EXPECT_LT(slope, -(2 * 1.0 + 2 - 3) + 0.3);
}

TEST(MassParts, ResidualShrinksOnCorpus) {
  for (const auto& entry : verification_corpus()) {
    const auto& m = entry.metric;
    const double mass = adm_mass(m, {250, 500, 1000}).mass;
    const auto res = mass_parts_residuals(m, {50, 100, 200}, mass);
    EXPECT_LE(std::abs(res[2]), std::abs(res[0]) + 1e-6 * (1 + std::abs(mass))) << entry.label;
  }
}

TEST(MassParts, ExactClosureUsesDerivedSign) {
  const auto m = build_conformal(3, 0.5, 1.0, center_grid());
  for (double r : {2.0, 10.0, 50.0}) {
    EXPECT_LT(std::abs(mass_parts_closure(m, r)), 1e-4);
  }
  EXPECT_GT(std::abs(mass_parts_closure(m, 2.0, -1.0)), 1.0);
}

TEST(WeightedNorm, ZeroAndPowerField) {
  const auto g = RadialGrid::center_sinh(0.01, 500.0, 1024);
  std::vector<double> zero(g.size(), 0.0), f(g.size());
  EXPECT_EQ(weighted_norm(g, 3, zero, 2, 0.25, 1.0).value, 0.0);
  const double delta = 1.3;
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::pow(rho(g[i]), -delta);
  const auto rep = weighted_norm(g, 3, f, 1, 0.25, delta);
  EXPECT_NEAR(rep.sup_terms[0], 1.0, 1e-6);
  EXPECT_GE(rep.holder, 0.0);
  EXPECT_GE(rep.value, rep.max_term);
}

TEST(WeightedNorm, IsANorm) {
  const auto g = RadialGrid::center_sinh(0.01, 200.0, 512);
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> f(g.size()), h(g.size()), s(g.size()), sc(g.size());
    const double a = nd(rng), b = nd(rng), c = nd(rng), d = nd(rng);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = g[i];
      f[i] = a * std::exp(-r * r / 10) + b / (1 + r * r);
      h[i] = c * std::sin(r) / (1 + r) + d * std::exp(-r);
      s[i] = f[i] + h[i];
      sc[i] = -2.5 * f[i];
    }
    for (int k : {0, 1, 2}) {
      const double nf = weighted_norm(g, 3, f, k, 0.3, 1.0).value;
      const double nh = weighted_norm(g, 3, h, k, 0.3, 1.0).value;
      EXPECT_LE(weighted_norm(g, 3, s, k, 0.3, 1.0).value, nf + nh + 1e-12 * (nf + nh));
      EXPECT_NEAR(weighted_norm(g, 3, sc, k, 0.3, 1.0).value, 2.5 * nf, 1e-12 * 2.5 * nf);
    }
  }
}

TEST(WeightedNorm, SchwarzschildDifferenceStableUnderRefinement) {
  double prev = 0.0;
  for (std::size_t n : {1024u, 2048u}) {
    const auto grid = exterior_grid(n, 1.0, 4000.0);
    const auto g = build_schwarzschild_isotropic(1.0, grid);
    const auto h = build_flat(3, grid);
    const double v = weighted_norm(g, h, 1, 0.25, 1.0).value;
    EXPECT_TRUE(std::isfinite(v));
    if (prev > 0.0) EXPECT_NEAR(v / prev, 1.0, 0.02);
    prev = v;
  }
}

TEST(Fairness, RatioBounds) {
  const auto grid = center_grid(256, 100.0);
  const auto h = build_flat(3, grid);
  auto g2 = h;
  for (auto& v : g2.A) v *= 2.0;
  for (auto& v : g2.B) v *= 2.0;
  EXPECT_TRUE(is_delta_fair(h, h, 1.0).fair);
  EXPECT_FALSE(is_delta_fair(h, g2, 1.5).fair);
  EXPECT_TRUE(is_delta_fair(h, g2, 2.0).fair);
  EXPECT_NEAR(is_delta_fair(h, g2, 2.0).max_ratio, 2.0, 0.0);
}

TEST(Grid, ThroatInversionIsFourthOrder) {
  // On a throat grid the Schwarzschild profile continues smoothly through the
  // minimal sphere, so R = 0 is resolved at 4th order right up to node 0.
  auto err = [](std::size_t n) {
    const auto g = build_schwarzschild_isotropic(1.0, rflow::testing::throat_grid(n, 1.0, 100.0));
    const auto R = scalar_curvature(g);
    double e = 0.0;
    for (std::size_t i = 0; i < 8; ++i) e = std::max(e, std::abs(R[i]));
    return e;
  };
  const double e1 = err(256), e2 = err(512);
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e2, 1e-4);
}
