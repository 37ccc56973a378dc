#pragma once

// Radial diffeomorphisms relating the h-flow to Ricci flow. With W = v d/dr the
// h-flow velocity, psi_t solves d/dt psi_t = -W(psi_t, t), psi_T = Id, so that
// psi_t^* g(t) is a Ricci flow through g(T); phi_t = psi_t^{-1} then satisfies
// g(t) = phi_t^* g(T) whenever g(T) is Ricci-flat.

#include <algorithm>
#include <cmath>
#include <vector>

#include "rflow/flow.hpp"
#include "rflow/metric.hpp"

namespace rflow {

// Radial map r -> f(r) sampled at the nodes of `grid`.
struct RadialMap {
  GridPtr grid;
  std::vector<double> f;

  std::size_t size() const { return f.size(); }
};

inline RadialMap identity_map(GridPtr grid) {
  RadialMap m{grid, grid->nodes()};
  return m;
}

struct DiffeoMap {
  GridPtr grid;
  std::vector<double> t;                  // snapshot times, t.back() = T
  std::vector<std::vector<double>> psi;   // psi_t(r_i)
  std::vector<std::vector<double>> phi;   // phi_t(r_i) = psi_t^{-1}(r_i)

  RadialMap phi_at(std::size_t k) const { return {grid, phi[k]}; }
  RadialMap psi_at(std::size_t k) const { return {grid, psi[k]}; }
};

namespace detail {

// v(r) by cubic interpolation; odd continuation below the first node of a
// center-regular grid and constant continuation past r_max.
inline double sample_velocity(const RadialGrid& grid, const std::vector<double>& v, double r) {
  if (r < grid[0]) {
    if (grid.center_regular()) return v[0] * r / grid[0];
    return v[0];
  }
  if (r > grid.r_max()) return v.back();
  return interpolate(grid, v, r, 4);
}

inline void check_monotone(const std::vector<double>& f, double t) {
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (!(f[i] > f[i - 1])) {
      throw NumericalAbort("diffeomorphism lost monotonicity at t = " + std::to_string(t));
    }
  }
  if (!(f[0] >= 0.0)) throw NumericalAbort("diffeomorphism left r >= 0 at t = " + std::to_string(t));
}

// Solve f(x) = y for a strictly increasing sampled f by local cubic
// interpolation of the inverse relation.
inline double invert_sampled(const RadialGrid& grid, const std::vector<double>& f, double y) {
  const std::size_t n = f.size();
  if (grid.center_regular() && y < f[0]) return grid[0] * y / f[0];
  const auto it = std::lower_bound(f.begin(), f.end(), y);
  long j = static_cast<long>(it - f.begin());
  long start = std::clamp(j - 2, 0L, static_cast<long>(n) - 4);
  double acc = 0.0;
  for (long a = 0; a < 4; ++a) {
    double w = 1.0;
    for (long b = 0; b < 4; ++b) {
      if (a != b) w *= (y - f[start + b]) / (f[start + a] - f[start + b]);
    }
    acc += w * grid[static_cast<std::size_t>(start + a)];
  }
  return acc;
}

}  // namespace detail

inline std::vector<double> invert(const RadialMap& m) {
  detail::check_monotone(m.f, 0.0);
  std::vector<double> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = detail::invert_sampled(*m.grid, m.f, (*m.grid)[i]);
  return out;
}

// Integrates psi' = -v(psi, t) backward from T with RK4 between consecutive
// stored W samples, W linear in t between samples.
inline DiffeoMap extract_diffeomorphism(const FlowTrajectory& traj) {
  if (traj.snapshots.empty() || traj.w.t.empty()) throw ConfigError("trajectory has no stored W fields");
  const auto grid = traj.snapshots.front().g.grid;
  if (grid->throat_radius() > 0.0) throw ConfigError("diffeomorphism extraction needs a center or exterior grid");
  const auto& ts = traj.w.t;
  const auto& vs = traj.w.v;
  auto velocity = [&](std::size_t j, double s, double r) {
    // s in [0, 1] between samples j and j + 1
    const double a = detail::sample_velocity(*grid, vs[j], r);
    const double b = detail::sample_velocity(*grid, vs[j + 1], r);
    return (1.0 - s) * a + s * b;
  };
  DiffeoMap out;
  out.grid = grid;
  const std::size_t K = traj.snapshots.size();
  out.t.resize(K);
  out.psi.resize(K);
  out.phi.resize(K);
  std::vector<double> psi = grid->nodes();
  std::size_t k = K;  // next snapshot to fill is k - 1
  auto record = [&](double t) {
    while (k > 0 && std::abs(traj.snapshots[k - 1].t - t) <= 1e-12 * std::max(1.0, t)) {
      --k;
      out.t[k] = traj.snapshots[k].t;
      out.psi[k] = psi;
    }
  };
  record(ts.back());
  for (std::size_t j = ts.size() - 1; j > 0; --j) {
    const double h = ts[j] - ts[j - 1];
    for (std::size_t i = 0; i < psi.size(); ++i) {
      // backward in t: s runs from 1 to 0 over the interval [t_{j-1}, t_j]
      const double y = psi[i];
      const double k1 = -velocity(j - 1, 1.0, y);
      const double k2 = -velocity(j - 1, 0.5, y - 0.5 * h * k1);
      const double k3 = -velocity(j - 1, 0.5, y - 0.5 * h * k2);
      const double k4 = -velocity(j - 1, 0.0, y - h * k3);
      psi[i] = y - h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    // the outer boundary carries Dirichlet data, so the gauge is pinned there too
    psi.back() = grid->r_max();
    detail::check_monotone(psi, ts[j - 1]);
    record(ts[j - 1]);
  }
  if (k != 0) throw ConfigError("W samples do not cover every snapshot time");
  for (std::size_t s = 0; s < K; ++s) out.phi[s] = invert({grid, out.psi[s]});
  return out;
}

// max_i |phi(psi(r_i)) - r_i| at snapshot k.
inline double composition_error(const DiffeoMap& d, std::size_t k) {
  double e = 0.0;
  const auto& grid = *d.grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y = d.psi[k][i];
    if (y > grid.r_max() || (!grid.center_regular() && y < grid.r_min())) continue;
    double fy;
    if (y < grid[0]) fy = d.phi[k][0] * y / grid[0];
    else fy = interpolate(grid, d.phi[k], y, 4);
    e = std::max(e, std::abs(fy - grid[i]));
  }
  return e;
}

namespace detail {

// phi' and phi'' through s = phi / r - 1 (even), so the identity and
// dilations are differentiated exactly: phi' = 1 + s + r s', phi'' = 2 s' + r s''.
inline Derivatives map_derivatives(const RadialMap& m) {
  const auto& grid = *m.grid;
  std::vector<double> s(m.f);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = s[i] / grid[i] - 1.0;
  const auto ds = differentiate(grid, s, Parity::even);
  Derivatives d{std::vector<double>(s.size()), std::vector<double>(s.size())};
  for (std::size_t i = 0; i < s.size(); ++i) {
    d.d1[i] = 1.0 + s[i] + grid[i] * ds.d1[i];
    d.d2[i] = 2.0 * ds.d1[i] + grid[i] * ds.d2[i];
  }
  return d;
}

// Cubic sample of a metric profile at an arbitrary radius inside its grid.
inline double metric_sample(const RadialMetric& g, const std::vector<double>& f, double r) {
  const auto& grid = g.g();
  if (grid.center_regular() && r < grid[0]) {
    // even profile: linear in r^2 through the first two nodes
    const double s = (r * r - grid[0] * grid[0]) / (grid[1] * grid[1] - grid[0] * grid[0]);
    return f[0] + s * (f[1] - f[0]);
  }
  return interpolate(g.g(), f, r, 4);
}

inline void check_inside(const RadialMetric& g, double y) {
  const auto& grid = g.g();
  const double lo = grid.center_regular() ? 0.0 : grid.r_min();
  const double tol = 1e-12 * std::max(1.0, grid.r_max());
  if (y < lo - tol || y > grid.r_max() + tol) {
    throw ConfigError("pullback would extrapolate beyond the grid (image radius " + std::to_string(y) + ")");
  }
}

}  // namespace detail

// (phi^* g) on the nodes of phi.grid: A -> phi'^2 A(phi), B -> B(phi) phi^2 / r^2.
inline RadialMetric pullback(const RadialMetric& g, const RadialMap& phi) {
  detail::check_monotone(phi.f, 0.0);
  const auto d = detail::map_derivatives(phi);
  RadialMetric out;
  out.grid = phi.grid;
  out.n = g.n;
  out.delta = g.delta;
  out.name = g.name + "-pullback";
  out.A.resize(phi.size());
  out.B.resize(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double r = (*phi.grid)[i], y = phi.f[i];
    detail::check_inside(g, y);
    const double Ay = detail::metric_sample(g, g.A, y), By = detail::metric_sample(g, g.B, y);
    out.A[i] = d.d1[i] * d.d1[i] * Ay;
    out.B[i] = By * (y / r) * (y / r);
  }
  return out;
}

// Closed-form pullback for metrics with a profile and maps given analytically.
inline RadialMetric pullback(const RadialMetric& g, GridPtr grid, const std::function<double(double)>& phi,
                             const std::function<double(double)>& dphi) {
  if (!g.profile) throw ConfigError("analytic pullback needs a metric profile");
  const Profile p = *g.profile;
  Profile q{[p, phi, dphi](double r) {
              const double d = dphi(r);
              return d * d * p.A(phi(r));
            },
            [p, phi](double r) {
              const double s = phi(r) / r;
              return p.B(phi(r)) * s * s;
            }};
  return from_profile(std::move(grid), g.n, q, g.delta, g.name + "-pullback");
}

// Radial reduction of the isometry identity
//   d_i d_j phi^k = Gamma^m_ij(g_t) d_m phi^k - Gammah^k_pq(g_T)(phi) d_i phi^p d_j phi^q
// at x = r e_1, with on-axis symbols Gamma^1_11 = A'/(2A) and
// Gamma^1_22 = ((A - B)/r - B'/2)/A. Returns the sup of the radial (11) and
// tangential (22) residuals over nodes away from the physical boundaries.
inline double taylor_consistency_check(const RadialMap& phi, const RadialMetric& g_t, const RadialMetric& g_T) {
  if (phi.grid != g_t.grid && phi.size() != g_t.size()) throw ConfigError("map and g_t must share a grid");
  const auto d = detail::map_derivatives(phi);
  const auto dt = derivs(g_t), dT = derivs(g_T);
  const auto& grid = *phi.grid;
  const std::size_t lo = grid.center_regular() ? 0 : 3;
  const std::size_t hi = grid.size() - 3;
  double worst = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double r = grid[i], y = phi.f[i];
    if (y >= g_T.g().r_max() || (!g_T.g().center_regular() && y <= g_T.g().r_min())) continue;
    const double At = dt.A[i], dAt = dt.dA[i], Bt = dt.B[i], dBt = dt.dB[i];
    const double AT = interpolate(g_T.g(), dT.A, y, 4), dAT = interpolate(g_T.g(), dT.dA, y, 4);
    const double BT = interpolate(g_T.g(), dT.B, y, 4), dBT = interpolate(g_T.g(), dT.dB, y, 4);
    const double p1 = d.d1[i], p2 = d.d2[i];
    const double rr = p2 - dAt / (2.0 * At) * p1 + dAT / (2.0 * AT) * p1 * p1;
    const double G22t = ((At - Bt) / r - 0.5 * dBt) / At;
    const double G22T = ((AT - BT) / y - 0.5 * dBT) / AT;
    const double tt = p1 / r - y / (r * r) - G22t * p1 + G22T * (y / r) * (y / r);
    worst = std::max({worst, std::abs(rr), std::abs(tt)});
  }
  return worst;
}

}  // namespace rflow
