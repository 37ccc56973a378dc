#pragma once

// Monitors for the inequalities used along the flow: the cutoff functions
// with Delta f <= C f, the Gronwall bound, the negative part of R, L^1 tails
// of R and the boundary flux of grad R. Monitors only read trajectories.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rflow/curvature.hpp"
#include "rflow/flow.hpp"
#include "rflow/integrals.hpp"
#include "rflow/stencil.hpp"

namespace rflow {

struct MonitorReport {
  std::string lemma;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, double>> measured;
  double tolerance = 0.0;
  bool pass = true;

  void set(const std::string& key, double v) {
    for (auto& [k, x] : measured) {
      if (k == key) {
        x = v;
        return;
      }
    }
    measured.emplace_back(key, v);
  }
  double get(const std::string& key) const {
    for (const auto& [k, x] : measured) {
      if (k == key) return x;
    }
    throw ConfigError("monitor " + lemma + " has no quantity " + key);
  }
};

// ---------------------------------------------------------------- cutoff

namespace detail {

// Cubic step 3u^2 - 2u^3 on [0, 1]. Its second derivative is largest (= 6) at
// u = 0+, where g_{r1} is smallest, so sup Delta g / g is 6 for every r1.
struct CubicStep {
  static double v(double u) { return u <= 0.0 ? 0.0 : u >= 1.0 ? 1.0 : u * u * (3.0 - 2.0 * u); }
  static double d1(double u) { return (u <= 0.0 || u >= 1.0) ? 0.0 : 6.0 * u * (1.0 - u); }
  static double d2(double u) { return (u <= 0.0 || u >= 1.0) ? 0.0 : 6.0 - 12.0 * u; }
};

}  // namespace detail

struct CutoffFunction {
  double r1 = 0.0, r2 = 0.0;
  int n = 3;
  GridPtr grid;
  std::vector<double> f, df, ddf;
  std::vector<double> laplacian;  // Delta_g f
  double C_meas = 0.0;            // sup Delta_g f / f
  // value constraints, each checked at every node
  bool inner_ok = true;   // f = 1/r1^2 for r < r1
  bool plateau_ok = true; // f >= 1 on [2 r1, r2]
  bool tail_ok = true;    // f <= r^{-n-1} for r > 2 r2
  bool range_ok = true;   // 0 < f <= 2
  bool constraints_ok() const { return inner_ok && plateau_ok && tail_ok && range_ok; }

  // Closed-form value and derivatives at any r.
  static std::array<double, 3> eval(int n, double r1, double r2, double r) {
    using S = detail::CubicStep;
    const double u = (r - r1) / r1;
    const double g = S::v(u) + 1.0 / (r1 * r1), dg = S::d1(u) / r1, ddg = S::d2(u) / (r1 * r1);
    // tail h = exp(-S(y) L(r)), L = (n+1) ln r + ln 2, so f <= r^{-n-1}/2 (1 + r1^-2) past 2 r2
    const double y = (r - r2) / r2;
    double h = 1.0, dh = 0.0, ddh = 0.0;
    if (y > 0.0) {
      const double L = (n + 1) * std::log(r) + std::log(2.0), dL = (n + 1) / r, ddL = -(n + 1) / (r * r);
      const double s = S::v(y), ds = S::d1(y) / r2, dds = S::d2(y) / (r2 * r2);
      const double l1 = -(ds * L + s * dL);
      const double l2 = -(dds * L + 2.0 * ds * dL + s * ddL);
      h = std::exp(-s * L);
      dh = h * l1;
      ddh = h * (l2 + l1 * l1);
    }
    return {g * h, dg * h + g * dh, ddg * h + 2.0 * dg * dh + g * ddh};
  }
};

// f_{r1,r2} = g_{r1} h_{r2} with g_{r1} = phi(r/r1) - 1 + 1/r1^2, phi stepping
// from 1 to 2 on [1, 2], and h_{r2} the tail above. Delta_g f uses the radial
// Laplacian f''/A + f' ((n-1)(1/r + B'/(2B))/A - A'/(2A^2)).
inline CutoffFunction build_cutoff(double r1, double r2, const RadialMetric& metric) {
  if (!(r1 > 1.0)) throw ConfigError("cutoff needs r1 > 1");
  if (!(r2 > 2.0 * r1)) throw ConfigError("cutoff needs r2 > 2 r1");
  if (!(r2 < 0.5 * metric.g().r_max())) throw ConfigError("cutoff needs r2 < r_max / 2");
  CutoffFunction c;
  c.r1 = r1;
  c.r2 = r2;
  c.n = metric.n;
  c.grid = metric.grid;
  const auto d = derivs(metric);
  const std::size_t N = metric.size();
  c.f.resize(N);
  c.df.resize(N);
  c.ddf.resize(N);
  c.laplacian.resize(N);
  const int n = metric.n;
  c.C_meas = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < N; ++i) {
    const double r = metric.g()[i];
    const auto [f, df, ddf] = CutoffFunction::eval(n, r1, r2, r);
    c.f[i] = f;
    c.df[i] = df;
    c.ddf[i] = ddf;
    const double A = d.A[i], B = d.B[i];
    const double lap = ddf / A + df * ((n - 1) * (1.0 / r + d.dB[i] / (2.0 * B)) / A - d.dA[i] / (2.0 * A * A));
    c.laplacian[i] = lap;
    c.C_meas = std::max(c.C_meas, lap / f);
    if (!(f > 0.0 && f <= 2.0)) c.range_ok = false;
    if (r < r1 && f != 1.0 / (r1 * r1)) c.inner_ok = false;
    if (r >= 2.0 * r1 && r <= r2 && f < 1.0) c.plateau_ok = false;
    if (r > 2.0 * r2 && f > std::pow(r, -(n + 1))) c.tail_ok = false;
  }
  return c;
}

// ---------------------------------------------------------------- Gronwall

enum class GronwallStatus { pass, hypothesis_violated, bound_violated };

inline const char* to_string(GronwallStatus s) {
  switch (s) {
    case GronwallStatus::pass: return "pass";
    case GronwallStatus::hypothesis_violated: return "hypothesis-violated";
    case GronwallStatus::bound_violated: return "bound-violated";
  }
  return "?";
}

struct GronwallReport {
  GronwallStatus status = GronwallStatus::pass;
  double worst_hypothesis = 0.0;  // max of F' - A F - B over intervals
  double worst_bound = 0.0;       // max of F(t) - e^A F(0) - B e^A
};

// F sampled at times t in [0, 1]. The differential inequality F' <= A F + B
// is checked on each interval as (F_{k+1} - F_k)/dt <= A (F_k + F_{k+1})/2 + B,
// which holds with margin O(dt^2) for the extremal F = e^{At}; the integrated
// bound F(t) <= e^A F(0) + B e^A is checked at every sample.
inline GronwallReport gronwall_check(const std::vector<double>& t, const std::vector<double>& F, double A, double B,
                                     double tol = 1e-12) {
  if (t.size() != F.size() || t.size() < 2) throw ConfigError("gronwall_check needs matching series of length >= 2");
  if (!(t.front() >= 0.0 && t.back() <= 1.0)) throw ConfigError("gronwall_check needs t in [0, 1]");
  GronwallReport rep;
  const double scale = 1.0 + std::abs(F.front());
  rep.worst_hypothesis = -std::numeric_limits<double>::infinity();
  rep.worst_bound = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double dt = t[k + 1] - t[k];
    if (!(dt > 0.0)) throw ConfigError("gronwall_check needs increasing times");
    const double lhs = (F[k + 1] - F[k]) / dt;
    rep.worst_hypothesis = std::max(rep.worst_hypothesis, lhs - A * 0.5 * (F[k] + F[k + 1]) - B);
  }
  const double eA = std::exp(A);
  for (double x : F) rep.worst_bound = std::max(rep.worst_bound, x - eA * F.front() - B * eA);
  if (rep.worst_hypothesis > tol * scale) rep.status = GronwallStatus::hypothesis_violated;
  else if (rep.worst_bound > tol * scale) rep.status = GronwallStatus::bound_violated;
  return rep;
}

// ---------------------------------------------------------------- monitors

// negative_part(g(t)) <= e^K negative_part(g(0)) + tol at every snapshot, with
// K = max(0, -inf R(g(0))) when K < 0 is passed. The margin is the smallest
// bound / value over snapshots t > 0 (infinite when the negative part is 0).
inline MonitorReport rneg_monitor(const FlowTrajectory& traj, double K = -1.0, double tol = 1e-6) {
  MonitorReport rep;
  rep.lemma = "rneg";
  rep.tolerance = tol;
  rep.columns = {"t", "negpart", "bound", "minR"};
  const auto R0 = scalar_curvature(traj.snapshots.front().g);
  if (K < 0.0) K = std::max(0.0, -*std::min_element(R0.begin(), R0.end()));
  const double p0 = negative_part(traj.snapshots.front().g, R0).value;
  const double bound = std::exp(K) * p0;
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& s : traj.snapshots) {
    const auto R = s.t == 0.0 ? R0 : scalar_curvature(s.g);
    const double p = negative_part(s.g, R).value;
    rep.rows.push_back({s.t, p, bound, *std::min_element(R.begin(), R.end())});
    if (p > bound + tol) rep.pass = false;
    if (s.t > 0.0 && p > 0.0) margin = std::min(margin, bound / p);
  }
  rep.set("K", K);
  rep.set("negpart0", p0);
  rep.set("margin", margin);
  return rep;
}

// Tails int_{|x|>r} |R| dV at each radius and snapshot. eta(r) is the tail of
// the initial metric, eta_tilde(r) the sup over t, and C the smallest constant
// with eta_tilde(2r) <= C (r^-2 + eta(r)) over the radius pairs (r, 2r) present.
// Passes when tails decrease in r at every t (within tol) and C is finite.
inline MonitorReport l1_tail_monitor(const FlowTrajectory& traj, std::vector<double> radii, double tol = 1e-6) {
  if (radii.empty()) throw ConfigError("l1_tail_monitor needs radii");
  std::sort(radii.begin(), radii.end());
  MonitorReport rep;
  rep.lemma = "l1tail";
  rep.tolerance = tol;
  rep.columns = {"t"};
  for (double r : radii) rep.columns.push_back("l1tail_r" + std::to_string(static_cast<long>(r)));
  std::vector<double> eta, eta_tilde(radii.size(), 0.0);
  for (const auto& s : traj.snapshots) {
    const auto R = scalar_curvature(s.g);
    std::vector<double> row{s.t};
    for (std::size_t j = 0; j < radii.size(); ++j) {
      const double v = l1_tail(s.g, R, radii[j]);
      row.push_back(v);
      eta_tilde[j] = std::max(eta_tilde[j], v);
      if (!std::isfinite(v)) rep.pass = false;
      if (j > 0 && v > row[j] + tol) rep.pass = false;
    }
    if (eta.empty()) eta.assign(row.begin() + 1, row.end());
    rep.rows.push_back(std::move(row));
  }
  double C = 0.0;
  for (std::size_t a = 0; a < radii.size(); ++a) {
    for (std::size_t b = a + 1; b < radii.size(); ++b) {
      if (std::abs(radii[b] - 2.0 * radii[a]) > 1e-12 * radii[b]) continue;
      C = std::max(C, eta_tilde[b] / (1.0 / (radii[a] * radii[a]) + eta[a]));
    }
  }
  if (!std::isfinite(C)) rep.pass = false;
  rep.set("C_fit", C);
  for (std::size_t j = 0; j < radii.size(); ++j) {
    rep.set("eta_r" + std::to_string(static_cast<long>(radii[j])), eta[j]);
    rep.set("eta_tilde_r" + std::to_string(static_cast<long>(radii[j])), eta_tilde[j]);
  }
  return rep;
}

// omega_{n-1} (r sqrt(B))^{n-1} |dR/dr| / sqrt(A): the integral of |grad R|
// over the coordinate sphere of radius r.
inline double boundary_gradient_flux(const RadialMetric& g, const std::vector<double>& dR, double r) {
  const double A = interpolate(g.g(), g.A, r), B = interpolate(g.g(), g.B, r);
  const double d = interpolate(g.g(), dR, r);
  return sphere_area(g.n) * std::pow(r * std::sqrt(B), g.n - 1) * std::abs(d) / std::sqrt(A);
}

// Flux of |grad R| through the spheres of `radii` for snapshots t >= t_from T.
// Passes when the flux decreases across the radii at every such t (within
// tol) and the outermost flux stays below the innermost.
inline MonitorReport boundary_gradient_monitor(const FlowTrajectory& traj, std::vector<double> radii,
                                               double t_from = 0.5, double tol = 1e-6) {
  if (radii.size() < 2) throw ConfigError("boundary_gradient_monitor needs two radii");
  std::sort(radii.begin(), radii.end());
  MonitorReport rep;
  rep.lemma = "boundary_gradient";
  rep.tolerance = tol;
  rep.columns = {"t"};
  for (double r : radii) rep.columns.push_back("gradflux_r" + std::to_string(static_cast<long>(r)));
  const double T = traj.snapshots.back().t;
  double worst_ratio = 0.0;
  for (const auto& s : traj.snapshots) {
    if (s.t < t_from * T * (1.0 - 1e-12)) continue;
    const auto R = scalar_curvature(s.g);
    const auto dR = first_derivative(s.g.g(), R, Parity::even);
    std::vector<double> row{s.t};
    for (std::size_t j = 0; j < radii.size(); ++j) {
      row.push_back(boundary_gradient_flux(s.g, dR, radii[j]));
      if (j > 0 && row.back() > row[j] + tol) rep.pass = false;
    }
    if (row.back() > row[1] + tol) rep.pass = false;
    if (row[1] > 0.0) worst_ratio = std::max(worst_ratio, row.back() / row[1]);
    rep.rows.push_back(std::move(row));
  }
  rep.set("t_from", t_from * T);
  rep.set("max_outer_inner_ratio", worst_ratio);
  return rep;
}

// Weighted decay of eta = g - h along the run: sup rho^d |eta| and
// sup rho^{d+1} |grad eta| over all snapshots, and sup rho^{d+1} |grad^2 eta|
// over t >= t_from T, each against `factor` times its reference value (t = 0,
// resp. the first snapshot at or after t_from T).
inline MonitorReport decay_monitor(const FlowTrajectory& traj, double t_from = 0.1, double factor = 10.0) {
  MonitorReport rep;
  rep.lemma = "weighted_decay";
  rep.tolerance = factor;
  rep.columns = {"t", "wnorm0", "wnorm1", "wnorm2"};
  const double T = traj.snapshots.back().t;
  std::array<double, 3> sup{}, ref{};
  bool have_ref2 = false;
  for (const auto& s : traj.snapshots) {
    rep.rows.push_back({s.t, s.decay[0], s.decay[1], s.decay[2]});
    for (int j = 0; j < 3; ++j) {
      if (!std::isfinite(s.decay[j])) rep.pass = false;
    }
    sup[0] = std::max(sup[0], s.decay[0]);
    sup[1] = std::max(sup[1], s.decay[1]);
    if (s.t >= t_from * T * (1.0 - 1e-12)) {
      if (!have_ref2) {
        ref[2] = s.decay[2];
        have_ref2 = true;
      }
      sup[2] = std::max(sup[2], s.decay[2]);
    }
  }
  ref[0] = traj.snapshots.front().decay[0];
  ref[1] = traj.snapshots.front().decay[1];
  const double floor = 1e-12;
  for (int j = 0; j < 3; ++j) {
    if (sup[j] > factor * std::max(ref[j], floor)) rep.pass = false;
    rep.set("sup_wnorm" + std::to_string(j), sup[j]);
    rep.set("ref_wnorm" + std::to_string(j), ref[j]);
  }
  return rep;
}

// Per-snapshot stream: flux at three radii, min R, negative part, the L^1 tail
// beyond tail_radius and the weighted norms of eta.
inline MonitorReport monitor_stream(const FlowTrajectory& traj, const std::vector<double>& flux_radii,
                                    double tail_radius) {
  if (flux_radii.size() != 3) throw ConfigError("monitor stream needs three flux radii");
  MonitorReport rep;
  rep.lemma = "stream";
  rep.columns = {"t", "mass_flux_r1", "mass_flux_r2", "mass_flux_r3", "minR", "negpart", "l1tail_r",
                 "wnorm0", "wnorm1", "wnorm2"};
  for (const auto& s : traj.snapshots) {
    const auto R = scalar_curvature(s.g);
    std::vector<double> row{s.t};
    for (double r : flux_radii) row.push_back(adm_mass_flux(s.g, r));
    row.push_back(*std::min_element(R.begin(), R.end()));
    row.push_back(negative_part(s.g, R).value);
    row.push_back(l1_tail(s.g, R, tail_radius));
    row.insert(row.end(), s.decay.begin(), s.decay.end());
    rep.rows.push_back(std::move(row));
  }
  rep.set("tail_radius", tail_radius);
  return rep;
}

}  // namespace rflow
