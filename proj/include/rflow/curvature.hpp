#pragma once

// Curvature of g = A dr^2 + C(r)^2 dOmega^2 with C = r sqrt(B). With
//   K_r = (C''/C - A' C' / (2 A C)) / A,   K_t = 1/C^2 - C'^2 / (A C^2)
// the Ricci eigenvalues are
//   radial:     -(n-1) K_r
//   tangential: -K_r + (n-2) K_t   (multiplicity n-1)
// K_t is expanded in terms of B so that the 1/r^2 singular parts cancel
// analytically at a regular center.

#include <cmath>
#include <optional>
#include <vector>

#include "rflow/metric.hpp"

namespace rflow {

struct RicciEigen {
  double radial = 0.0;
  double tangential = 0.0;
};

inline RicciEigen ricci_eigen(int n, double r, double A, double dA, double B, double dB, double ddB) {
  const double cC = 1.0 / r + dB / (2.0 * B);
  const double cCC = dB / (r * B) + ddB / (2.0 * B) - dB * dB / (4.0 * B * B);
  const double Kr = (cCC - dA * cC / (2.0 * A)) / A;
  const double Kt = (A - B) / (r * r * A * B) - dB / (r * A * B) - dB * dB / (4.0 * A * B * B);
  return {-(n - 1) * Kr, -Kr + (n - 2) * Kt};
}

inline double scalar_from_eigen(int n, const RicciEigen& e) { return e.radial + (n - 1) * e.tangential; }
inline double ricci_sq_from_eigen(int n, const RicciEigen& e) {
  return e.radial * e.radial + (n - 1) * e.tangential * e.tangential;
}

inline void require_positive(const RadialMetric& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(m.A[i] > 0.0) || !(m.B[i] > 0.0)) {
      throw NumericalAbort("non-positive metric component at r = " + std::to_string(m.g()[i]));
    }
  }
}

inline std::vector<RicciEigen> ricci_eigen(const RadialMetric& m, const MetricDerivs& d) {
  std::vector<RicciEigen> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    out[i] = ricci_eigen(m.n, m.g()[i], d.A[i], d.dA[i], d.B[i], d.dB[i], d.ddB[i]);
  }
  return out;
}

inline std::vector<double> scalar_curvature(const RadialMetric& m, const MetricDerivs& d) {
  std::vector<double> R(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    R[i] = scalar_from_eigen(m.n, ricci_eigen(m.n, m.g()[i], d.A[i], d.dA[i], d.B[i], d.dB[i], d.ddB[i]));
  }
  return R;
}

inline std::vector<double> scalar_curvature(const RadialMetric& m) {
  require_positive(m);
  return scalar_curvature(m, derivs(m));
}

inline std::vector<double> ricci_norm_sq(const RadialMetric& m) {
  require_positive(m);
  const auto d = derivs(m);
  std::vector<double> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    out[i] = ricci_sq_from_eigen(m.n, ricci_eigen(m.n, m.g()[i], d.A[i], d.dA[i], d.B[i], d.dB[i], d.ddB[i]));
  }
  return out;
}

// Sectional curvatures of radial and tangential 2-planes. Used for the
// bounded-curvature half of the fairness test.
inline double max_sectional_curvature(const RadialMetric& m) {
  const auto d = derivs(m);
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double r = m.g()[i];
    const double cC = 1.0 / r + d.dB[i] / (2.0 * d.B[i]);
    const double cCC = d.dB[i] / (r * d.B[i]) + d.ddB[i] / (2.0 * d.B[i]) - d.dB[i] * d.dB[i] / (4.0 * d.B[i] * d.B[i]);
    const double Kr = (cCC - d.dA[i] * cC / (2.0 * d.A[i])) / d.A[i];
    const double Kt = (d.A[i] - d.B[i]) / (r * r * d.A[i] * d.B[i]) - d.dB[i] / (r * d.A[i] * d.B[i]) -
                      d.dB[i] * d.dB[i] / (4.0 * d.A[i] * d.B[i] * d.B[i]);
    s = std::max({s, std::abs(Kr), std::abs(Kt)});
  }
  return s;
}

// Mean curvature of {r = const} for the outward normal from A, B, B'.
inline double mean_curvature_value(int n, double r, double A, double B, double dB) {
  return (n - 1) * (1.0 / r + dB / (2.0 * B)) / std::sqrt(A);
}

enum class SphereSide { smooth, inner, outer };

// H of the coordinate sphere at r0. `inner` and `outer` use one-sided stencils
// from that side only and require r0 to be a grid node.
inline double mean_curvature_sphere(const RadialMetric& m, double r0, SphereSide side = SphereSide::smooth) {
  const auto& g = m.g();
  const std::size_t i = g.nearest_index(r0);
  const bool on_node = std::abs(g[i] - r0) <= 1e-12 * std::max(1.0, r0);
  if (side != SphereSide::smooth) {
    if (!on_node) throw ConfigError("one-sided mean curvature needs r0 on a grid node");
    const auto [dB, ddB] = one_sided_derivs(g, m.B, i, side == SphereSide::inner ? Side::inner : Side::outer);
    (void)ddB;
    return mean_curvature_value(m.n, r0, m.A[i], m.B[i], dB);
  }
  if (r0 <= g.r_min() || r0 >= g.r_max()) throw ConfigError("mean curvature radius must be interior");
  const auto dB = first_derivative(g, m.B, Parity::metric);
  if (on_node) return mean_curvature_value(m.n, r0, m.A[i], m.B[i], dB[i]);
  return mean_curvature_value(m.n, r0, interpolate(g, m.A, r0), interpolate(g, m.B, r0), interpolate(g, dB, r0));
}

}  // namespace rflow
