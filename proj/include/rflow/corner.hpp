#pragma once

// Corner metrics: continuous across the sphere r = r0 with a jump in the
// normal derivative. Strength s is the jump B'(r0-) - B'(r0+), so that
//   H(inner) - H(outer) = (n-1) s / (2 sqrt(A) B)
// and s >= 0 exactly when the mean-curvature condition holds.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rflow/curvature.hpp"
#include "rflow/integrals.hpp"
#include "rflow/metric.hpp"
#include "rflow/quadrature.hpp"

namespace rflow {

struct CornerMetric {
  RadialMetric metric;  // both pieces on one grid sharing the node at r0
  double r0 = 0.0;
  std::size_t i0 = 0;
  double strength = std::numeric_limits<double>::quiet_NaN();  // NaN when built from pieces
  // Inner flux constant b with u' = -b / r^{n-1} near r0. b < 0 forces R < 0
  // somewhere inside a center-regular interior.
  double interior_flux = std::numeric_limits<double>::quiet_NaN();

  int n() const { return metric.n; }
  double delta() const { return metric.delta; }
  RadialMetric inner() const { return restrict_metric(metric, 0, i0); }
  RadialMetric outer() const { return restrict_metric(metric, i0, metric.size() - 1); }

  static RadialMetric restrict_metric(const RadialMetric& m, std::size_t first, std::size_t last) {
    RadialMetric out;
    out.grid = share(m.g().slice(first, last));
    out.n = m.n;
    out.delta = m.delta;
    out.name = m.name;
    out.A.assign(m.A.begin() + first, m.A.begin() + last + 1);
    out.B.assign(m.B.begin() + first, m.B.begin() + last + 1);
    return out;
  }
};

namespace detail {

inline std::size_t corner_node(const RadialGrid& g, double r0) {
  std::size_t i = 0;
  if (!on_node(g, r0, i)) throw ConfigError("corner radius must coincide with a grid node");
  if (i < 6 || i + 7 > g.size()) throw ConfigError("corner radius too close to the grid ends");
  return i;
}

}  // namespace detail

// Joins an inner piece ending at r0 and an outer piece starting at r0.
inline CornerMetric corner_from_pieces(const RadialMetric& inner, const RadialMetric& outer, double tol = 1e-12) {
  if (inner.n != outer.n) throw ConfigError("corner pieces must share the dimension");
  const double r0 = inner.g().r_max();
  if (std::abs(outer.g().r_min() - r0) > 1e-12 * std::max(1.0, r0)) throw ConfigError("corner pieces must meet at r0");
  if (std::abs(inner.A.back() - outer.A.front()) > tol || std::abs(inner.B.back() - outer.B.front()) > tol) {
    throw ConfigError("metric is discontinuous at r0");
  }
  std::vector<double> r(inner.g().nodes());
  std::vector<double> A(inner.A), B(inner.B);
  for (std::size_t i = 1; i < outer.size(); ++i) {
    r.push_back(outer.g()[i]);
    A.push_back(outer.A[i]);
    B.push_back(outer.B[i]);
  }
  CornerMetric cm;
  cm.metric.grid = share(RadialGrid::from_nodes(std::move(r), inner.g().center_regular()));
  cm.metric.n = inner.n;
  cm.metric.delta = outer.delta;
  cm.metric.name = "corner";
  cm.metric.A = std::move(A);
  cm.metric.B = std::move(B);
  cm.r0 = r0;
  cm.i0 = detail::corner_node(cm.metric.g(), r0);
  return cm;
}

struct CornerCondition {
  double H_minus = 0.0;
  double H_plus = 0.0;
  bool satisfied = false;
};

inline CornerCondition corner_condition(const CornerMetric& cm, double tol = 1e-8) {
  CornerCondition c;
  c.H_minus = mean_curvature_sphere(cm.metric, cm.r0, SphereSide::inner);
  c.H_plus = mean_curvature_sphere(cm.metric, cm.r0, SphereSide::outer);
  c.satisfied = c.H_minus >= c.H_plus - tol;
  return c;
}

// Corner of strength s on a conformally flat base g = u^p delta, p = 4/(n-2).
// Outside r0 the base is kept. Inside, u' = -b(r)/r^{n-1} with b = b_in fixed
// by the jump; on a center-regular grid b ramps smoothly from 0 (u constant
// near the center) to b_in on [r0/4, r0/2], otherwise u is harmonic.
inline CornerMetric corner_example(const RadialMetric& base, double r0, double s, GridPtr grid = nullptr) {
  if (!base.profile) throw ConfigError("corner_example needs a base metric with a closed-form profile");
  if (!grid) grid = base.grid;
  const int n = base.n;
  const Profile bp = *base.profile;
  for (double r : {r0, 2.0 * r0, 10.0 * r0}) {
    if (std::abs(bp.A(r) - bp.B(r)) > 1e-12 * std::abs(bp.B(r))) {
      throw ConfigError("corner_example needs a conformally flat base (A = B)");
    }
  }
  const std::size_t i0 = detail::corner_node(*grid, r0);
  const double p = 4.0 / (n - 2);
  auto u = [&](double r) { return std::pow(bp.B(r), 1.0 / p); };
  const double u0 = u(r0);
  const double hh = 1e-3 * r0;
  const double du0 = (-u(r0 + 2 * hh) + 8 * u(r0 + hh) - 8 * u(r0 - hh) + u(r0 - 2 * hh)) / (12 * hh);
  const double du_in = du0 + s / (p * std::pow(u0, p - 1.0));
  const double b_in = -std::pow(r0, n - 1) * du_in;
  const bool ramp = grid->center_regular();
  const double a = 0.25 * r0;
  const auto rule = gauss_legendre(48, 0.0, 1.0);
  auto harmonic = [=](double r) { return u0 + b_in / (n - 2) * (std::pow(r, 2 - n) - std::pow(r0, 2 - n)); };
  auto u_in = [=](double r) {
    if (!ramp || r >= 2.0 * a) return harmonic(r);
    // u(r) = u(2a) + int_r^{2a} b(t) t^{1-n} dt, b = b_in smooth_step((t - a)/a)
    const double lo = std::max(r, a), hi = 2.0 * a;
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
      const double t = lo + (hi - lo) * rule.x[k];
      acc += rule.w[k] * smooth_step((t - a) / a) * std::pow(t, 1 - n);
    }
    return harmonic(hi) + b_in * acc * (hi - lo);
  };
  const double u_center = ramp ? u_in(0.0) : u_in(grid->r_min());
  for (std::size_t i = 0; i <= i0; ++i) {
    if (!(u_in((*grid)[i]) > 0.0) || !(u_center > 0.0)) {
      throw ConfigError("corner strength makes the inner conformal factor non-positive");
    }
  }
  auto A = [=](double r) { return r <= r0 ? std::pow(u_in(r), p) : bp.A(r); };
  auto B = [=](double r) { return r <= r0 ? std::pow(u_in(r), p) : bp.B(r); };
  CornerMetric cm;
  cm.metric = from_profile(grid, n, Profile{A, B}, base.delta, base.name + "-corner");
  cm.r0 = r0;
  cm.i0 = i0;
  cm.strength = s;
  cm.interior_flux = b_in;
  return cm;
}

// Corner of strength s on isotropic Schwarzschild of mass m at r0, on a
// collar grid whose spacing resolves mollification collars down to sigma_min
// with 40 nodes.
inline CornerMetric schwarzschild_corner(double s, double sigma_min = 1e-2, double mass = 1.0, double r0 = 4.0,
                                         double r_max = 2000.0) {
  if (!(sigma_min > 0.0 && sigma_min <= 0.1)) throw ConfigError("sigma_min must lie in (0, 0.1]");
  const auto base = build_schwarzschild_isotropic(mass, share(RadialGrid::geometric(0.5 * mass, 2.0 * r_max, 256)));
  const auto grid = share(RadialGrid::collar(r0, sigma_min / 40.0, 0.06, r_max));
  return corner_example(base, r0, s, grid);
}

struct SmoothingReport {
  double epsilon = 0.0;
  double sigma = 0.0;
  double K_measured = 0.0;  // inf R over the grid
  double neg_part = 0.0;
  double neg_part_masked = 0.0;
  double neg_measure = 0.0;
  double sandwich_min = 1.0;
  double sandwich_max = 1.0;
  double support_deviation = 0.0;  // max |g_eps - g| outside the collar
  double K_target = 10.0;
  int attempts = 0;
  bool neg_ok = false, K_ok = false, sandwich_ok = false, support_ok = false;
  bool satisfied = false;
};

struct Mollified {
  RadialMetric metric;
  SmoothingReport report;
};

namespace detail {

// Triweight kernel (1 - x^2)^3 on (-1, 1). Only the kink is convolved and the
// pieces already carry a jump in the second derivative, so a C-infinity kernel
// would buy no regularity, while this one is resolved by far fewer nodes.
inline double bump_kernel(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  const double q = 1.0 - x * x;
  return q * q * q;
}

// (K * |.|)(x) - |x| for the unit-mass bump of half-width `half`. Symmetric
// kernels reproduce linear functions, so this vanishes for |x| >= half.
inline double smoothed_abs_excess(double x, double half) {
  if (std::abs(x) >= half) return 0.0;
  static const auto rule = gauss_legendre(64, 0.0, 1.0);
  double num = 0.0, norm = 0.0;
  // split at tau = x where |x - tau| has its kink
  for (const auto& [a, b] : {std::pair{-half, x}, std::pair{x, half}}) {
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
      const double t = a + (b - a) * rule.x[k];
      const double w = rule.w[k] * (b - a) * bump_kernel(t / half);
      norm += w;
      num += w * std::abs(x - t);
    }
  }
  return num / norm - std::abs(x);
}

// Only the kink is mollified: near r0 each component is f_smooth - (j/2)|r - r0|
// with j = f'(r0-) - f'(r0+), and the |.| term is replaced by its convolution.
// The metric is untouched outside the collar |r - r0| < sigma/2 and the
// second-derivative jump of the pieces is kept, so the result is C^{1,1}.
inline RadialMetric mollify_with(const CornerMetric& cm, double sigma) {
  RadialMetric out = cm.metric;
  out.profile.reset();
  out.name = cm.metric.name + "-mollified";
  const auto& g = cm.metric.g();
  auto jump = [&](const std::vector<double>& f) {
    return one_sided_derivs(g, f, cm.i0, Side::inner).first - one_sided_derivs(g, f, cm.i0, Side::outer).first;
  };
  const double jA = jump(cm.metric.A), jB = jump(cm.metric.B);
  const double half = 0.5 * sigma;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double e = smoothed_abs_excess(g[i] - cm.r0, half);
    if (e == 0.0) continue;
    out.A[i] -= 0.5 * jA * e;
    out.B[i] -= 0.5 * jB * e;
  }
  return out;
}

}  // namespace detail

// Certificate for the mollification at a given sigma.
inline SmoothingReport smoothing_report(const CornerMetric& cm, const RadialMetric& gm, double eps, double sigma,
                                        double K_target) {
  SmoothingReport rep;
  rep.epsilon = eps;
  rep.sigma = sigma;
  rep.K_target = K_target;
  const auto R = scalar_curvature(gm);
  rep.K_measured = *std::min_element(R.begin(), R.end());
  const auto np = negative_part(gm, R);
  rep.neg_part = np.value;
  rep.neg_part_masked = np.masked;
  rep.neg_measure = np.measure;
  rep.sandwich_min = std::numeric_limits<double>::infinity();
  rep.sandwich_max = 0.0;
  for (std::size_t i = 0; i < gm.size(); ++i) {
    for (double q : {gm.A[i] / cm.metric.A[i], gm.B[i] / cm.metric.B[i]}) {
      rep.sandwich_min = std::min(rep.sandwich_min, q);
      rep.sandwich_max = std::max(rep.sandwich_max, q);
    }
    if (std::abs(gm.g()[i] - cm.r0) >= sigma) {
      rep.support_deviation = std::max({rep.support_deviation, std::abs(gm.A[i] - cm.metric.A[i]),
                                        std::abs(gm.B[i] - cm.metric.B[i])});
    }
  }
  rep.neg_ok = rep.neg_part < eps;
  rep.K_ok = rep.K_measured > -K_target;
  rep.sandwich_ok = rep.sandwich_min >= 1.0 - eps && rep.sandwich_max <= 1.0 + eps;
  rep.support_ok = rep.support_deviation <= 1e-14;
  rep.satisfied = rep.neg_ok && rep.K_ok && rep.sandwich_ok && rep.support_ok;
  return rep;
}

// Mollification in the sigma-collar about r0, sigma starting at eps and halved
// until the certificate passes or the collar falls below 4 grid spacings. The
// last attempt is returned with satisfied = false when nothing passes.
inline Mollified mollify(const CornerMetric& cm, double eps, double K_target = 10.0) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  const double h = std::max(cm.metric.g().spacing(cm.i0), cm.metric.g().spacing(cm.i0 - 1));
  double sigma = eps;
  Mollified best;
  int attempts = 0;
  while (true) {
    ++attempts;
    best.metric = detail::mollify_with(cm, sigma);
    best.report = smoothing_report(cm, best.metric, eps, sigma, K_target);
    best.report.attempts = attempts;
    if (best.report.satisfied || 0.5 * sigma < 4.0 * h) break;
    sigma *= 0.5;
  }
  if (sigma < 4.0 * h) best.report.satisfied = false;
  return best;
}

}  // namespace rflow
