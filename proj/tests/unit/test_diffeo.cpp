#include <gtest/gtest.h>

#include <cmath>

#include "corpus.hpp"
#include "rflow/diffeo.hpp"

using namespace rflow;
using rflow::testing::center_grid;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double c0_distance(const RadialMetric& a, const RadialMetric& b, double r_max = 1e300) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size() && a.g()[i] <= r_max; ++i) {
    e = std::max({e, std::abs(a.A[i] - b.A[i]), std::abs(a.B[i] - b.B[i])});
  }
  return e;
}

Distortion smooth_distortion() {
  Distortion d;
  d.kinked = false;
  d.amplitude = 0.05;
  return d;
}

struct ZeroMassRun {
  RadialMetric g0;
  FlowTrajectory traj;
  DiffeoMap diffeo;
};

const ZeroMassRun& zero_mass_run() {
  static const ZeroMassRun run = [] {
    ZeroMassRun z;
    const auto grid = center_grid();
    z.g0 = build_distorted_flat(3, Distortion{}, grid);
    FlowConfig c;
    c.T_final = 0.01;
    c.snapshots = 10;
    c.fairness = 1.2;
    z.traj = evolve(z.g0, build_flat(3, grid), c);
    z.diffeo = extract_diffeomorphism(z.traj);
    return z;
  }();
  return run;
}

}  // namespace

TEST(Diffeo, FlatTrajectoryGivesIdentity) {
  const auto grid = center_grid(256, 100.0);
  const auto flat = build_flat(3, grid);
  FlowConfig c;
  c.T_final = 1e-3;
  c.snapshots = 3;
  const auto D = extract_diffeomorphism(evolve(flat, flat, c));
  for (std::size_t k = 0; k < D.t.size(); ++k) {
    for (std::size_t i = 0; i < grid->size(); ++i) {
      EXPECT_EQ(D.psi[k][i], (*grid)[i]);
      EXPECT_NEAR(D.phi[k][i], (*grid)[i], 1e-12 * (*grid)[i]);
    }
  }
}

TEST(Diffeo, PullbackByIdentityIsExact) {
  const auto g = build_conformal(3, 0.5, 1.0, center_grid(512, 100.0));
  const auto pb = pullback(g, identity_map(g.grid));
  EXPECT_EQ(c0_distance(pb, g), 0.0);
  EXPECT_LT(taylor_consistency_check(identity_map(g.grid), g, g), 1e-12);
}

TEST(Diffeo, DoublingMapKeepsFlatFlat) {
  const auto big = build_flat(3, center_grid(2048, 400.0));
  const auto small = center_grid(1024, 150.0);
  RadialMap phi{small, small->nodes()};
  for (double& y : phi.f) y *= 2.0;
  const auto pb = pullback(big, phi);
  for (std::size_t i = 0; i < pb.size(); ++i) {
    EXPECT_NEAR(pb.A[i], 4.0, 1e-10);
    EXPECT_NEAR(pb.B[i], 4.0, 1e-10);
  }
  EXPECT_LT(max_abs(scalar_curvature(pb)), 1e-8);
  // the image leaves the source grid
  RadialMap far{big.grid, big.grid->nodes()};
  for (double& y : far.f) y *= 2.0;
  EXPECT_THROW(pullback(big, far), ConfigError);
}

TEST(Diffeo, RoundTripThroughKnownMap) {
  const auto grid = center_grid();
  const auto d = smooth_distortion();
  const auto g = build_distorted_flat(3, d, grid);
  RadialMap Phi{grid, grid->nodes()};
  for (std::size_t i = 0; i < grid->size(); ++i) Phi.f[i] = d((*grid)[i]);
  const RadialMap inv{grid, invert(Phi)};
  // (Phi^{-1})^* Phi^* flat = flat, away from the outer nodes whose images leave the grid
  const auto pb = pullback(g, RadialMap{grid, inv.f});
  EXPECT_LT(c0_distance(pb, build_flat(3, grid), 1000.0), 1e-8);
}

TEST(Diffeo, ExtractedMapReproducesEarlierMetrics) {
  const auto& z = zero_mass_run();
  const auto& gT = z.traj.snapshots.back().g;
  for (std::size_t k = 1; k < z.traj.snapshots.size(); ++k) {
    const auto pb = pullback(gT, z.diffeo.phi_at(k));
    EXPECT_LT(c0_distance(pb, z.traj.snapshots[k].g), 1e-3) << "k=" << k;
    EXPECT_LT(composition_error(z.diffeo, k), 1e-8) << "k=" << k;
  }
  // t = 0 is the Lipschitz initial metric; the C^0 recovery is still close.
  EXPECT_LT(c0_distance(pullback(gT, z.diffeo.phi_at(0)), z.g0), 1e-2);
}

TEST(Diffeo, TaylorIdentityHoldsAndDetectsWrongMap) {
  const auto& z = zero_mass_run();
  const auto& gT = z.traj.snapshots.back().g;
  const std::size_t k = 1;
  const auto& gk = z.traj.snapshots[k].g;
  const double good = taylor_consistency_check(z.diffeo.phi_at(k), gk, gT);
  EXPECT_LT(good, 1e-3);
  auto wrong = z.diffeo.phi_at(k);
  for (std::size_t i = 0; i < wrong.size(); ++i) {
    const double x = (z.diffeo.grid->nodes()[i] - 5.0);
    wrong.f[i] += 0.01 * std::exp(-x * x);
  }
  EXPECT_GT(taylor_consistency_check(wrong, gk, gT), 10.0 * good);
}

TEST(Diffeo, GaugeEquivalenceOfPulledBackRuns) {
  // Evolving Phi^* g against Phi^* h gives Phi^* of the original run.
  const auto grid = center_grid(1024, 200.0);
  const auto d = smooth_distortion();
  auto phi = [d](double r) { return d(r); };
  auto dphi = [d](double r) { return d.derivative(r); };
  const auto g = build_conformal(3, 0.4, 1.0, grid);
  const auto h = build_conformal(3, 0.2, 1.5, grid);
  const auto pg = pullback(g, grid, phi, dphi), ph = pullback(h, grid, phi, dphi);
  FlowConfig c;
  c.T_final = 2e-3;
  c.snapshots = 2;
  c.fairness = 3.0;
  const auto a = evolve(g, h, c);
  const auto b = evolve(pg, ph, c);
  const auto& ga = a.snapshots.back().g;
  const auto& gb = b.snapshots.back().g;
  const auto Ra = scalar_curvature(ga), Rb = scalar_curvature(gb);
  const auto Qa = ricci_norm_sq(ga), Qb = ricci_norm_sq(gb);
  const double Rs = max_abs(Ra), Qs = max_abs(Qa);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double r = (*grid)[i];
    if (r > 50.0) break;
    const double y = phi(r);
    EXPECT_NEAR(Rb[i], interpolate(*grid, Ra, y), 1e-3 * Rs) << "r=" << r;
    EXPECT_NEAR(Qb[i], interpolate(*grid, Qa, y), 1e-3 * Qs) << "r=" << r;
  }
}
