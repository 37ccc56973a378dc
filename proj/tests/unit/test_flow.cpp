#include <gtest/gtest.h>

#include <cmath>

#include "corpus.hpp"
#include "rflow/flow.hpp"
#include "rflow/mass.hpp"
#include "rflow/oracle.hpp"

using namespace rflow;
using rflow::testing::center_grid;
using rflow::testing::throat_grid;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

struct Pair {
  RadialMetric g, h;
};

// Metric/background pairs with g != h everywhere near the center.
std::vector<Pair> flow_pairs() {
  const auto grid = center_grid();
  std::vector<Pair> p;
  p.push_back({build_conformal(3, 0.5, 1.0, grid), build_bump(3, 0.2, 0.1, 1.5, grid)});
  p.push_back({build_conformal(4, 0.8, 1.5, grid), build_flat(4, grid)});
  p.push_back({build_anisotropic(5, 0.4, 0.3, grid), build_conformal(5, 0.2, 1.0, grid)});
  p.push_back({build_bump(3, 0.3, -0.2, 1.5, grid), build_conformal(3, 0.3, 2.0, grid)});
  return p;
}

// dg_ij/dt = -2 Ric_ij + d_i W_j + d_j W_i - 2 Gamma^k_ij W_k from the Cartesian oracle.
oracle::Mat oracle_rate(const oracle::Evaluator& g, const oracle::Evaluator& h, const oracle::Vec& x) {
  const int n = g.dim();
  auto W = [&](const oracle::Vec& y) { return oracle::deturck(g, h, y); };
  const double step = 4.0 * g.h(x);
  std::vector<oracle::Vec> dW(n);
  for (int i = 0; i < n; ++i) dW[i] = oracle::fd(W, x, i, step);
  const auto G = g.christoffel(x);
  const oracle::Vec w = W(x);
  oracle::Mat L(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = dW[i](j) + dW[j](i);
      for (int k = 0; k < n; ++k) s -= 2.0 * G[k](i, j) * w(k);
      L(i, j) = s;
    }
  return -2.0 * g.ricci(x) + L;
}

}  // namespace

TEST(Flow, FlatIsStationary) {
  const auto flat = build_flat(3, center_grid(512, 100.0));
  const auto rate = flow_rhs(flat, flat);
  EXPECT_LT(max_abs(rate.A), 1e-12);
  EXPECT_LT(max_abs(rate.B), 1e-12);
  const auto eta = flow_rhs(flat, flat, RhsForm::eta_equation);
  EXPECT_LT(max_abs(eta.A), 1e-12);
}

TEST(Flow, DeTurckVanishesWhenMetricEqualsBackground) {
  for (const auto& p : flow_pairs()) EXPECT_LT(max_abs(deturck_vector(p.g, p.g)), 1e-12) << p.g.name;
}

TEST(Flow, DeTurckMatchesOracle) {
  for (const auto& p : flow_pairs()) {
    const int n = p.g.n;
    const oracle::Evaluator eg(oracle::cartesian(*p.g.profile, n), n), eh(oracle::cartesian(*p.h.profile, n), n);
    const auto dg = derivs(p.g), dh = derivs(p.h);
    for (double r : {0.3, 1.0, 2.5, 6.0}) {
      const std::size_t i = p.g.g().nearest_index(r);
      const double ri = p.g.g()[i];
      const double v = deturck_value(n, ri, node(dg, i), node(dh, i)).first;
      const auto W = oracle::deturck(eg, eh, oracle::on_axis(n, ri));
      EXPECT_NEAR(v, W(0) / p.g.A[i], 1e-6 * (1.0 + std::abs(v))) << p.g.name << " r=" << ri;
      for (int k = 1; k < n; ++k) EXPECT_NEAR(W(k), 0.0, 1e-8);
    }
  }
}

TEST(Flow, GeometricRateMatchesOracle) {
  for (const auto& p : flow_pairs()) {
    const int n = p.g.n;
    const oracle::Evaluator eg(oracle::cartesian(*p.g.profile, n), n), eh(oracle::cartesian(*p.h.profile, n), n);
    const auto rate = flow_rhs(p.g, p.h);
    for (double r : {0.3, 1.0, 2.5, 6.0}) {
      const std::size_t i = p.g.g().nearest_index(r);
      const double ri = p.g.g()[i];
      const auto M = oracle_rate(eg, eh, oracle::on_axis(n, ri));
      const double scale = 1e-5 * (1.0 + M.norm());
      EXPECT_NEAR(rate.A[i], M(0, 0), scale) << p.g.name << " r=" << ri;
      EXPECT_NEAR(rate.B[i], M(1, 1), scale) << p.g.name << " r=" << ri;
      EXPECT_NEAR(M(0, 1), 0.0, scale);
    }
  }
}

TEST(Flow, EtaEquationAgreesWithGeometricForm) {
  for (const auto& p : flow_pairs()) {
    const auto a = flow_rhs(p.g, p.h, RhsForm::geometric);
    const auto b = flow_rhs(p.g, p.h, RhsForm::eta_equation);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.g.size(); ++i) {
      worst = std::max(worst, std::abs(a.A[i] - b.A[i]) / (1.0 + std::abs(a.A[i])));
      worst = std::max(worst, std::abs(a.B[i] - b.B[i]) / (1.0 + std::abs(a.B[i])));
    }
    EXPECT_LT(worst, 1e-9) << p.g.name;
  }
}

TEST(Flow, HeunIsSecondOrderInTime) {
  const auto grid = center_grid(256, 50.0);
  const auto g0 = build_conformal(3, 0.5, 1.0, grid);
  const auto h = build_bump(3, 0.2, 0.1, 1.5, grid);
  const auto dh = derivs(h);
  const double dt = stable_dt(g0, 0.2);
  const int steps = 40;
  auto run = [&](int refine) {
    RadialMetric g = g0;
    for (int k = 0; k < steps * refine; ++k) h_flow_step(g, h, dh, dt / refine, RhsForm::geometric, 2);
    return g;
  };
  const auto ref = run(16);
  auto err = [&](const RadialMetric& g) {
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) e = std::max({e, std::abs(g.A[i] - ref.A[i]), std::abs(g.B[i] - ref.B[i])});
    return e;
  };
  const double e1 = err(run(1)), e2 = err(run(2)), e4 = err(run(4));
  EXPECT_NEAR(e1 / e2, 4.0, 0.6);
  EXPECT_NEAR(e2 / e4, 4.0, 0.6);
}

TEST(Flow, MinimumOfScalarCurvatureDoesNotDecrease) {
  // a < 0 gives R < 0 everywhere; under Ricci flow min R is non-decreasing.
  const auto grid = center_grid(1024, 200.0);
  const auto g = build_conformal(3, -0.3, 1.0, grid);
  ASSERT_LT(min_of(scalar_curvature(g)), -0.1);
  FlowConfig c;
  c.T_final = 0.02;
  c.snapshots = 5;
  const auto traj = evolve(g, blended_background(g, c.fairness), c);
  double prev = -1e300;
  for (const auto& s : traj.snapshots) {
    const double m = min_of(scalar_curvature(s.g));
    EXPECT_GE(m, prev - 1e-10) << "t=" << s.t;
    prev = m;
  }
}

TEST(Flow, ScalarCurvatureEvolutionWithAdvection) {
  const auto grid = center_grid(1024, 200.0);
  const auto g = build_conformal(3, 0.3, 1.0, grid);
  const auto h = build_flat(3, grid);
  FlowConfig c;
  c.T_final = 4e-3;
  c.snapshots = 40;
  c.fairness = 3.0;
  const auto traj = evolve(g, h, c);
  const std::size_t k = 20;
  const auto with = scalar_evolution_residual(traj, k, true);
  const auto without = scalar_evolution_residual(traj, k, false);
  const double scale = max_abs(scalar_curvature(traj.snapshots[k].g));
  EXPECT_LT(max_abs(with), 1e-3 * scale);
  // The h-flow is Ricci flow in a moving gauge: dropping v R' leaves an O(1) defect.
  EXPECT_GT(max_abs(without), 20.0 * max_abs(with));
}

TEST(Flow, SchwarzschildOnThroatGridKeepsRNonNegativeAndMass) {
  const auto g = build_schwarzschild_isotropic(1.0, throat_grid(1024));
  FlowConfig c;
  c.T_final = 0.01;
  c.snapshots = 4;
  const auto traj = evolve(g, blended_background(g, c.fairness), c);
  const double m16 = 16.0 * std::numbers::pi;
  for (const auto& s : traj.snapshots) {
    // R = 0 at t = 0 up to truncation error; afterwards R >= 0.
    EXPECT_GE(min_of(scalar_curvature(s.g)), -1e-7) << "t=" << s.t;
    const auto rep = adm_mass(s.g, {50.0, 100.0, 200.0});
    EXPECT_LT(std::abs(rep.mass - m16) / m16, 1e-3) << "t=" << s.t;
  }
}

TEST(Flow, UnfairBackgroundIsRejected) {
  const auto g = build_schwarzschild_isotropic(1.0, throat_grid(256));
  const auto flat = build_flat(3, g.grid);
  FlowConfig c;
  c.T_final = 1e-4;
  c.snapshots = 1;
  EXPECT_THROW(evolve(g, flat, c), ConfigError);
  // Schwarzschild against flat h is fair once the bound covers (1 + 1/(2 r_min))^4.
  c.fairness = 17.0;
  EXPECT_NO_THROW(evolve(g, flat, c));
}

TEST(Flow, InvalidConfigIsRejected) {
  FlowConfig c;
  c.cfl = 0.9;
  EXPECT_THROW(c.validate(), ConfigError);
  c = FlowConfig{};
  c.T_final = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Flow, SnapshotsLandOnRequestedTimes) {
  const auto grid = center_grid(256, 200.0);
  const auto g = build_conformal(3, 0.5, 1.0, grid);
  FlowConfig c;
  c.T_final = 1e-3;
  c.snapshots = 7;
  const auto traj = evolve(g, blended_background(g, c.fairness), c);
  ASSERT_EQ(traj.snapshots.size(), 8u);
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    EXPECT_NEAR(traj.snapshots[k].t, c.T_final * k / 7.0, 1e-15);
  }
  EXPECT_LE(traj.max_fairness_ratio, c.fairness);
}

TEST(Flow, RosenbrockAgreesWithHeun) {
  const auto g = build_schwarzschild_isotropic(1.0, throat_grid(1024));
  const auto h = blended_background(g, 1.1);
  FlowConfig c;
  c.T_final = 0.01;
  c.snapshots = 2;
  const auto explicit_run = evolve(g, h, c);
  c.stepper = Stepper::rosenbrock;
  c.tolerance = 1e-9;
  const auto implicit_run = evolve(g, h, c);
  EXPECT_LT(implicit_run.dt_history.size(), explicit_run.dt_history.size());
  const auto& a = explicit_run.snapshots.back().g;
  const auto& b = implicit_run.snapshots.back().g;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max({d, std::abs(a.A[i] - b.A[i]), std::abs(a.B[i] - b.B[i])});
  EXPECT_LT(d, 1e-8);
  EXPECT_EQ(implicit_run.snapshots.back().t, 0.01);
}

TEST(Flow, RosenbrockStepsAreLargeOnFineGrids) {
  // explicit steps scale with dr^2; the implicit step follows the solution
  const auto grid = share(RadialGrid::collar(4.0, 2.5e-4, 0.06, 200.0));
  const auto g = build_conformal(3, 0.2, 2.0, grid);
  FlowConfig c;
  c.T_final = 1e-3;
  c.snapshots = 1;
  c.stepper = Stepper::rosenbrock;
  c.fairness = 1.5;
  const auto run = evolve(g, build_flat(3, grid), c);
  EXPECT_LT(run.dt_history.size(), 200u);
  EXPECT_GT(*std::max_element(run.dt_history.begin(), run.dt_history.end()), 1e3 * stable_dt(g, c.cfl));
}
