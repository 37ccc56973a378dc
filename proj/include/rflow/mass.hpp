#pragma once

// ADM mass in the unnormalized convention
//   m(g) = lim_{r -> inf} int_{|x| = r} (g_ij,j - g_jj,i) dS^i,
// which for the radial gauge reduces to
//   omega_{n-1} r^{n-1} (n-1) [ (A - B)/r - B' ].
// Standard mass = unnormalized / (2 (n-1) omega_{n-1}); for n = 3 divide by 16 pi.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rflow/curvature.hpp"
#include "rflow/metric.hpp"
#include "rflow/tensor_jet.hpp"

namespace rflow {

inline double flux_value(int n, double r, double A, double B, double dB) {
  return sphere_area(n) * std::pow(r, n - 1) * (n - 1) * ((A - B) / r - dB);
}

inline double standard_mass(int n, double unnormalized) {
  return unnormalized / (2.0 * (n - 1) * sphere_area(n));
}

inline bool in_asymptotic_regime(const RadialMetric& m, double r) {
  return std::abs(interpolate(m.g(), m.A, r) - 1.0) <= 0.5;
}

namespace detail {

inline bool on_node(const RadialGrid& g, double r, std::size_t& i) {
  i = g.nearest_index(r);
  return std::abs(g[i] - r) <= 1e-12 * std::max(1.0, r);
}

inline double flux_at(const RadialMetric& m, const std::vector<double>& dB, double r) {
  std::size_t i = 0;
  if (on_node(m.g(), r, i)) return flux_value(m.n, r, m.A[i], m.B[i], dB[i]);
  return flux_value(m.n, r, interpolate(m.g(), m.A, r), interpolate(m.g(), m.B, r), interpolate(m.g(), dB, r));
}

}  // namespace detail

inline double adm_mass_flux(const RadialMetric& m, double r) {
  if (r <= m.g().r_min() || r >= m.g().r_max()) throw ConfigError("flux radius outside the grid");
  return detail::flux_at(m, first_derivative(m.g(), m.B, Parity::metric), r);
}

struct MassReport {
  std::vector<double> radii;
  std::vector<double> flux;
  double mass = 0.0;  // unnormalized
  double lambda_fit = std::numeric_limits<double>::quiet_NaN();
  double amplitude = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
  bool monotone = true;
  std::vector<double> parts_residual;
  std::vector<std::string> warnings;
};

struct PowerFit {
  double mass = 0.0;
  double amplitude = 0.0;
  double lambda = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
};

// Exact fit of f(r) = m + a r^{-lambda} through three points.
inline PowerFit power_law_fit(double r1, double f1, double r2, double f2, double r3, double f3) {
  PowerFit fit;
  const double d12 = f1 - f2, d23 = f2 - f3;
  const double scale = std::abs(f1) + std::abs(f2) + std::abs(f3);
  if (std::abs(d12) + std::abs(d23) <= 1e-13 * (1.0 + scale)) {
    fit.mass = f3;
    fit.ok = true;
    return fit;
  }
  if (d12 == 0.0 || d23 == 0.0 || (d12 > 0.0) != (d23 > 0.0)) {
    fit.mass = f3;
    return fit;
  }
  const double target = d12 / d23;
  auto model = [&](double lam) {
    const double a = std::pow(r1, -lam), b = std::pow(r2, -lam), c = std::pow(r3, -lam);
    return (a - b) / (b - c);
  };
  double lo = 1e-4, hi = 30.0;
  if (!(target > model(lo)) || !(target < model(hi))) {
    fit.mass = f3;
    return fit;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (model(mid) < target ? lo : hi) = mid;
  }
  fit.lambda = 0.5 * (lo + hi);
  fit.amplitude = d23 / (std::pow(r2, -fit.lambda) - std::pow(r3, -fit.lambda));
  fit.mass = f3 - fit.amplitude * std::pow(r3, -fit.lambda);
  fit.ok = true;
  return fit;
}

// Flux ladder with power-law extrapolation on the outermost three radii.
inline MassReport adm_mass(const RadialMetric& m, std::vector<double> radii) {
  if (radii.size() < 3) throw ConfigError("adm_mass needs at least three radii");
  std::sort(radii.begin(), radii.end());
  MassReport rep;
  rep.radii = radii;
  const auto dB = first_derivative(m.g(), m.B, Parity::metric);
  for (double r : radii) {
    if (r <= m.g().r_min() || r >= m.g().r_max()) throw ConfigError("flux radius outside the grid");
    if (!in_asymptotic_regime(m, r)) rep.warnings.push_back("radius " + std::to_string(r) + " outside asymptotic regime");
    rep.flux.push_back(detail::flux_at(m, dB, r));
  }
  const std::size_t k = radii.size();
  const auto fit = power_law_fit(radii[k - 3], rep.flux[k - 3], radii[k - 2], rep.flux[k - 2], radii[k - 1], rep.flux[k - 1]);
  rep.mass = fit.mass;
  rep.lambda_fit = fit.lambda;
  rep.amplitude = fit.amplitude;
  rep.converged = fit.ok;
  if (!fit.ok) rep.warnings.push_back("non-convergent flux ladder");
  rep.error_estimate = std::abs(rep.flux[k - 1] - rep.mass);
  const double noise = 1e-12 * (1.0 + std::abs(rep.mass));
  for (std::size_t i = k - 2; i < k; ++i) {
    if (std::abs(rep.flux[i] - rep.mass) > std::abs(rep.flux[i - 1] - rep.mass) + 2.0 * noise) rep.monotone = false;
  }
  return rep;
}

namespace detail {

// Radial volume density omega_{n-1} sqrt(A) (r sqrt(B))^{n-1}.
inline double volume_density(int n, double r, double A, double B) {
  return sphere_area(n) * std::sqrt(A) * std::pow(r * std::sqrt(B), n - 1);
}

// int_{r}^{r_last} f dr on node data with a partial first segment; r_last
// defaults to r_max.
inline double tail_integral(const RadialGrid& g, const std::vector<double>& f, double r,
                            std::size_t last = static_cast<std::size_t>(-1)) {
  last = std::min(last, g.size() - 1);
  std::size_t i0 = g.lower_index(r) + 1;
  if (i0 > last) return 0.0;
  const double fr = interpolate(g, f, r);
  return 0.5 * (fr + f[i0]) * (g[i0] - r) + integrate_xi(g, f, i0, last);
}

}  // namespace detail

// int_{M \ B_r} R dV + flux(r) - mass. Tends to zero like r^{-lambda}.
inline double mass_parts_residual(const RadialMetric& m, double r, double mass) {
  const auto d = derivs(m);
  const auto R = scalar_curvature(m, d);
  std::vector<double> f(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) f[i] = R[i] * detail::volume_density(m.n, m.g()[i], m.A[i], m.B[i]);
  return detail::tail_integral(m.g(), f, r) + detail::flux_at(m, d.dB, r) - mass;
}

inline std::vector<double> mass_parts_residuals(const RadialMetric& m, const std::vector<double>& radii, double mass) {
  std::vector<double> out;
  for (double r : radii) out.push_back(mass_parts_residual(m, r, mass));
  return out;
}

// Terms of the divergence form of R at radius r along a ray:
//   R = |g|^{-1/2} d_i V^i + correction,
//   V^i = |g|^{1/2} g^{ij} (Gamma_j - (1/2) d_j log|g|),
//   correction = -(1/2) g^{ij} Gamma_i d_j log|g| + g^{ij} g^{kl} g^{pq} Gamma_ikp Gamma_jql
// with Gamma_ikp = g_pm Gamma^m_ik.
struct DivergenceTerms {
  double v_radial = 0.0;
  double gamma_log = 0.0;  // g^{ij} Gamma_i d_j log|g|
  double gamma_sq = 0.0;
  double correction() const { return -0.5 * gamma_log + gamma_sq; }
};

inline DivergenceTerms divergence_terms(int n, double r, double A, double dA, double ddA, double B, double dB,
                                        double ddB) {
  using namespace jet;
  const auto J = radial_jet(n, r, metric_coeffs(A, dA, ddA, B, dB, ddB));
  const auto C = connection(J);
  std::array<double, kMaxDim> up{}, low{}, dlog{};
  for (int k = 0; k < n; ++k) {
    for (int p = 0; p < n; ++p) up[k] += C.ginv(p, p) * C.G(k, p, p);
    low[k] = C.g(k, k) * up[k];
  }
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < n; ++a) dlog[j] += C.ginv(a, a) * J.D(j, a, a);
  DivergenceTerms t;
  t.v_radial = std::sqrt(A * std::pow(B, n - 1)) * C.ginv(0, 0) * (low[0] - 0.5 * dlog[0]);
  double gl = 0.0, q = 0.0;
  for (int i = 0; i < n; ++i) gl += C.ginv(i, i) * low[i] * dlog[i];
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int p = 0; p < n; ++p) q += C.ginv(i, i) * C.ginv(k, k) * C.ginv(p, p) * C.Glow(p, i, k) * C.Glow(k, i, p);
  t.gamma_log = gl;
  t.gamma_sq = q;
  return t;
}

// Exact annulus form of the integration-by-parts identity:
//   int_{r < |x| < r_max} (R - correction) dV + Vflux(r) - Vflux(r_max),
// which vanishes up to quadrature error. `half_sign` = +1 uses the derived
// correction; -1 flips the sign of its (1/2) g Gamma dlog|g| term.
inline double mass_parts_closure(const RadialMetric& m, double r, double half_sign = 1.0) {
  const auto d = derivs(m);
  const auto R = scalar_curvature(m, d);
  std::vector<double> f(m.size()), vflux(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double ri = m.g()[i];
    const auto t = divergence_terms(m.n, ri, d.A[i], d.dA[i], d.ddA[i], d.B[i], d.dB[i], d.ddB[i]);
    const double corr = -0.5 * half_sign * t.gamma_log + t.gamma_sq;
    f[i] = (R[i] - corr) * detail::volume_density(m.n, ri, m.A[i], m.B[i]);
    vflux[i] = sphere_area(m.n) * std::pow(ri, m.n - 1) * t.v_radial;
  }
  // Stop a few nodes short of r_max, where only 2nd-order stencils are available.
  const std::size_t last = m.size() - 4;
  return detail::tail_integral(m.g(), f, r, last) + interpolate(m.g(), vflux, r) - vflux[last];
}

}  // namespace rflow
