#pragma once

// Rotationally symmetric metrics g = A(r) dr^2 + B(r) r^2 dOmega^2 in n
// dimensions. In Cartesian coordinates
//   g_ij = B delta_ij + (A - B) x_i x_j / r^2.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rflow/error.hpp"
#include "rflow/grid.hpp"
#include "rflow/stencil.hpp"

namespace rflow {

// Closed-form A(r), B(r) for metrics that have one. The Cartesian oracles
// evaluate these directly instead of interpolating grid samples.
struct Profile {
  std::function<double(double)> A;
  std::function<double(double)> B;
};

struct RadialMetric {
  GridPtr grid;
  int n = 3;
  std::vector<double> A;
  std::vector<double> B;
  double delta = 1.0;
  std::string name;
  std::optional<Profile> profile;

  std::size_t size() const { return A.size(); }
  const RadialGrid& g() const { return *grid; }
};

struct MetricDerivs {
  std::vector<double> A, dA, ddA;
  std::vector<double> B, dB, ddB;
};

inline MetricDerivs derivs(const RadialMetric& m) {
  auto da = differentiate(*m.grid, m.A, Parity::metric);
  auto db = differentiate(*m.grid, m.B, Parity::metric);
  return {m.A, std::move(da.d1), std::move(da.d2), m.B, std::move(db.d1), std::move(db.d2)};
}

inline void check_dimension(int n) {
  if (n < 3) throw ConfigError("dimension must be at least 3");
}

inline void check_positive(const RadialMetric& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(m.A[i] > 0.0) || !(m.B[i] > 0.0)) {
      throw NumericalAbort("metric not positive definite at r = " + std::to_string(m.g()[i]));
    }
  }
}

inline RadialMetric from_profile(GridPtr grid, int n, Profile p, double delta, std::string name) {
  check_dimension(n);
  RadialMetric m;
  m.grid = std::move(grid);
  m.n = n;
  m.delta = delta;
  m.name = std::move(name);
  m.A.resize(m.grid->size());
  m.B.resize(m.grid->size());
  for (std::size_t i = 0; i < m.grid->size(); ++i) {
    const double r = (*m.grid)[i];
    m.A[i] = p.A(r);
    m.B[i] = p.B(r);
  }
  m.profile = std::move(p);
  return m;
}

inline RadialMetric build_flat(int n, GridPtr grid) {
  auto one = [](double) { return 1.0; };
  return from_profile(std::move(grid), n, {one, one}, static_cast<double>(n), "flat");
}

// Isotropic Schwarzschild slice, A = B = (1 + m/(2r))^4, n = 3.
inline RadialMetric build_schwarzschild_isotropic(double mass, GridPtr grid, int n = 3) {
  if (n != 3) throw ConfigError("isotropic Schwarzschild is only provided for n = 3");
  if (mass < 0.0) throw ConfigError("Schwarzschild mass must be non-negative");
  if (!(grid->r_min() > 0.0) || grid->center_regular()) throw ConfigError("Schwarzschild grid must exclude r = 0");
  if (mass == 0.0) return build_flat(3, std::move(grid));
  auto psi4 = [mass](double r) { return std::pow(1.0 + mass / (2.0 * r), 4); };
  auto m = from_profile(std::move(grid), 3, {psi4, psi4}, 1.0, "schwarzschild");
  return m;
}

// Conformally flat metric u^{4/(n-2)} delta with u = 1 + a (b^2 + r^2)^{-(n-2)/2}.
// For a > 0 this has R > 0 everywhere and mass proportional to a.
inline RadialMetric build_conformal(int n, double a, double b, GridPtr grid) {
  check_dimension(n);
  const double p = 4.0 / (n - 2);
  auto f = [=](double r) { return std::pow(1.0 + a * std::pow(b * b + r * r, -0.5 * (n - 2)), p); };
  return from_profile(std::move(grid), n, {f, f}, static_cast<double>(n - 2), "conformal");
}

// Compactly concentrated, non-conformal perturbation of flat space.
inline RadialMetric build_bump(int n, double alpha, double beta, double width, GridPtr grid) {
  check_dimension(n);
  auto bump = [width](double r) {
    const double x = r / width;
    return x * x * std::exp(-x * x);
  };
  return from_profile(std::move(grid), n, {[=](double r) { return 1.0 + alpha * bump(r); },
                                           [=](double r) { return 1.0 + beta * bump(r); }},
                      2.0 * n, "bump");
}

// Conformal profile with an extra radial stretch: A != B at infinity order r^-2.
inline RadialMetric build_anisotropic(int n, double a, double c, GridPtr grid) {
  check_dimension(n);
  const double p = 4.0 / (n - 2);
  auto u = [=](double r) { return std::pow(1.0 + a * std::pow(1.0 + r * r, -0.5 * (n - 2)), p); };
  auto A = [=](double r) { return u(r) * (1.0 + c * r * r / ((1.0 + r * r) * (1.0 + r * r))); };
  return from_profile(std::move(grid), n, {A, u}, std::min(2.0, static_cast<double>(n - 2)), "anisotropic");
}

// Radial diffeomorphism Phi(r) = r + amplitude * width * I((r - r_k)/width) with
// Phi' = 1 + amplitude * q(x). The kinked profile q(x) = x e^{1-x} makes Phi'
// Lipschitz with a corner at r_k; the smooth profile q(x) = (x/4)^4 e^{4-x} is C^3.
// Both peak at q = 1, so max Phi' = 1 + amplitude.
struct Distortion {
  double r_k = 3.0;
  double amplitude = 0.05;
  double width = 1.0;
  bool kinked = true;

  double q(double x) const {
    if (x <= 0.0) return 0.0;
    if (kinked) return x * std::exp(1.0 - x);
    const double y = x / 4.0;
    return y * y * y * y * std::exp(4.0 - x);
  }
  double q_integral(double x) const {
    if (x <= 0.0) return 0.0;
    if (kinked) return std::exp(1.0) * (1.0 - (1.0 + x) * std::exp(-x));
    const double poly = x * x * x * x + 4 * x * x * x + 12 * x * x + 24 * x + 24;
    return std::exp(4.0) / 256.0 * (24.0 - std::exp(-x) * poly);
  }
  double q_prime(double x) const {
    if (x <= 0.0) return 0.0;
    if (kinked) return (1.0 - x) * std::exp(1.0 - x);
    const double y = x / 4.0;
    return (y * y * y - y * y * y * y) * std::exp(4.0 - x);
  }
  double operator()(double r) const { return r + amplitude * width * q_integral((r - r_k) / width); }
  double derivative(double r) const { return 1.0 + amplitude * q((r - r_k) / width); }
  double second_derivative(double r) const { return amplitude / width * q_prime((r - r_k) / width); }
  // Phi(r) - r at infinity.
  double shift() const { return amplitude * width * q_integral(1e9); }
};

// Phi^* (flat): A = Phi'^2, B = (Phi / r)^2.
inline RadialMetric build_distorted_flat(int n, const Distortion& phi, GridPtr grid) {
  check_dimension(n);
  auto A = [phi](double r) {
    const double d = phi.derivative(r);
    return d * d;
  };
  auto B = [phi](double r) {
    if (r <= phi.r_k) return 1.0;
    const double s = phi(r) / r;
    return s * s;
  };
  return from_profile(std::move(grid), n, {A, B}, 1.0, phi.kinked ? "distorted-flat-kinked" : "distorted-flat");
}

}  // namespace rflow
