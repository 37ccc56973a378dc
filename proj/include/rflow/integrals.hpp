#pragma once

// Volume integrals of the scalar curvature: the negative part
//   int_{R < 0} |R| dV
// and L^1 tails int_{M \ B_r} |R| dV, with dV from the metric determinant.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "rflow/curvature.hpp"
#include "rflow/mass.hpp"
#include "rflow/metric.hpp"

namespace rflow {

namespace detail {

inline std::vector<double> density(const RadialMetric& m) {
  std::vector<double> w(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) w[i] = volume_density(m.n, m.g()[i], m.A[i], m.B[i]);
  return w;
}

// int f dr over the whole grid; the piece [0, r_0] of a center-regular grid uses
// f ~ r^{n-1}.
inline double integrate_all(const RadialGrid& g, const std::vector<double>& f, int n) {
  double s = integrate_xi(g, f, 0, g.size() - 1);
  if (g.center_regular()) s += f[0] * g[0] / n;
  return s;
}

}  // namespace detail

struct NegativePartReport {
  double value = 0.0;   // delta -> 0 extrapolation
  double masked = 0.0;  // direct quadrature of max(-R, 0)
  std::array<double, 3> deltas{1e-4, 1e-6, 1e-8};
  std::array<double, 3> smoothed{};  // baseline-corrected smoothed integrals per delta
  double measure = 0.0;              // volume of {R < 0}
};

// Direct quadrature of max(-R, 0) dV. Intervals where R changes sign are cut
// at the linearly interpolated zero.
inline double masked_negative_part(const RadialMetric& m, const std::vector<double>& R, double* measure = nullptr) {
  const auto w = detail::density(m);
  const auto& g = m.g();
  double s = 0.0, vol = 0.0;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    const double a = -R[i], b = -R[i + 1];
    if (a <= 0.0 && b <= 0.0) continue;
    const double dr = g[i + 1] - g[i];
    if (a >= 0.0 && b >= 0.0) {
      s += 0.5 * (a * w[i] + b * w[i + 1]) * dr;
      vol += 0.5 * (w[i] + w[i + 1]) * dr;
      continue;
    }
    // one sign change at fraction c of the interval
    const double c = a / (a - b);
    const double wc = w[i] + c * (w[i + 1] - w[i]);
    if (a > 0.0) {
      s += 0.5 * a * w[i] * c * dr;
      vol += 0.5 * (w[i] + wc) * c * dr;
    } else {
      s += 0.5 * b * w[i + 1] * (1.0 - c) * dr;
      vol += 0.5 * (wc + w[i + 1]) * (1.0 - c) * dr;
    }
  }
  if (g.center_regular() && R[0] < 0.0) {
    s += -R[0] * w[0] * g[0] / m.n;
    vol += w[0] * g[0] / m.n;
  }
  if (measure) *measure = vol;
  return s;
}

// Smoothed integrand (1/2)(sqrt(R^2 + d) - R) -> max(-R, 0) as d -> 0. The
// constant (1/2) sqrt(d) carried by every point with R = 0 is removed against
// the total volume, and the three values are extrapolated to d = 0 by an
// exact fit a + b sqrt(d) + c d.
inline NegativePartReport negative_part(const RadialMetric& m, const std::vector<double>& R) {
  NegativePartReport rep;
  const auto w = detail::density(m);
  const double vol = detail::integrate_all(m.g(), w, m.n);
  std::vector<double> f(m.size());
  for (std::size_t k = 0; k < 3; ++k) {
    const double d = rep.deltas[k];
    for (std::size_t i = 0; i < m.size(); ++i) f[i] = 0.5 * (std::sqrt(R[i] * R[i] + d) - R[i]) * w[i];
    rep.smoothed[k] = detail::integrate_all(m.g(), f, m.n) - 0.5 * std::sqrt(d) * vol;
  }
  // solve for a in I(s) = a + b s + c s^2, s = sqrt(d)
  const double s1 = std::sqrt(rep.deltas[0]), s2 = std::sqrt(rep.deltas[1]), s3 = std::sqrt(rep.deltas[2]);
  const double I1 = rep.smoothed[0], I2 = rep.smoothed[1], I3 = rep.smoothed[2];
  const double l1 = s2 * s3 / ((s1 - s2) * (s1 - s3));
  const double l2 = s1 * s3 / ((s2 - s1) * (s2 - s3));
  const double l3 = s1 * s2 / ((s3 - s1) * (s3 - s2));
  rep.value = std::max(0.0, l1 * I1 + l2 * I2 + l3 * I3);
  rep.masked = masked_negative_part(m, R, &rep.measure);
  return rep;
}

inline NegativePartReport negative_part(const RadialMetric& m) { return negative_part(m, scalar_curvature(m)); }

// int_{r < |x|} |R| dV up to r_max, as the exact integral of the piecewise
// linear interpolant. |R| has kinks and node-to-node noise where R ~ 0, and a
// rule with unequal weights (Simpson) would make the tail non-monotone in r.
inline double l1_tail(const RadialMetric& m, const std::vector<double>& R, double r) {
  const auto w = detail::density(m);
  const auto& g = m.g();
  std::vector<double> f(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) f[i] = std::abs(R[i]) * w[i];
  if (r <= g[0]) {
    double s = trapezoid(g, f, 0, g.size() - 1);
    if (g.center_regular()) s += f[0] * g[0] / m.n;
    return s;
  }
  const std::size_t i0 = g.lower_index(r);  // first node >= r
  if (i0 >= g.size()) return 0.0;
  const double c = (r - g[i0 - 1]) / (g[i0] - g[i0 - 1]);
  const double fr = f[i0 - 1] + c * (f[i0] - f[i0 - 1]);
  return 0.5 * (fr + f[i0]) * (g[i0] - r) + trapezoid(g, f, i0, g.size() - 1);
}

}  // namespace rflow
