#pragma once

// One-dimensional heat equation f_t = f_xx on [-X_max, X_max] with f = 0 at
// both ends, used to show that parabolic smoothing does not improve the
// polynomial decay of f(x, 0) = sin(x) / (1 + x^2).

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "rflow/error.hpp"

namespace rflow {

struct HeatProfile {
  double X_max = 200.0;
  double dx = 0.05;
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> f;

  std::size_t size() const { return f.size(); }
};

inline HeatProfile heat_profile(const std::function<double(double)>& f0, double X_max = 200.0, double dx = 0.05) {
  if (!(X_max > 0.0 && dx > 0.0 && dx < X_max)) throw ConfigError("heat grid needs 0 < dx < X_max");
  const double cells = std::round(2.0 * X_max / dx);
  if (std::abs(cells * dx - 2.0 * X_max) > 1e-9 * X_max) throw ConfigError("dx must divide 2 X_max");
  HeatProfile p;
  p.X_max = X_max;
  p.dx = dx;
  const auto N = static_cast<std::size_t>(cells) + 1;
  p.x.resize(N);
  p.f.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    p.x[i] = -X_max + dx * static_cast<double>(i);
    p.f[i] = (i == 0 || i + 1 == N) ? 0.0 : f0(p.x[i]);
  }
  return p;
}

inline double decay_initial(double x) { return std::sin(x) / (1.0 + x * x); }

namespace detail {

// (F_{i+1/2} - F_{i-1/2}) / dx with F_{i+1/2} = (f_{i+1} - f_i) / dx; the
// boundary values stay 0.
inline void heat_rate(const std::vector<double>& f, double dx, std::vector<double>& out) {
  const std::size_t N = f.size();
  const double s = 1.0 / (dx * dx);
  out[0] = out[N - 1] = 0.0;
  for (std::size_t i = 1; i + 1 < N; ++i) out[i] = ((f[i + 1] - f[i]) - (f[i] - f[i - 1])) * s;
}

}  // namespace detail

// Heun (RK2) in time with dt <= dt_factor dx^2, the last step shortened to hit T.
inline HeatProfile heat_evolve(const HeatProfile& p, double T, double dt_factor = 0.4) {
  if (!(T >= 0.0)) throw ConfigError("heat_evolve needs T >= 0");
  if (!(dt_factor > 0.0 && dt_factor <= 0.5)) throw ConfigError("dt factor must lie in (0, 0.5]");
  HeatProfile out = p;
  if (T == 0.0) return out;
  const double dt_max = dt_factor * p.dx * p.dx;
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt_max - 1e-12));
  const double dt = T / static_cast<double>(steps);
  const std::size_t N = p.size();
  std::vector<double> k1(N), k2(N), mid(N);
  for (std::size_t s = 0; s < steps; ++s) {
    detail::heat_rate(out.f, p.dx, k1);
    for (std::size_t i = 0; i < N; ++i) mid[i] = out.f[i] + dt * k1[i];
    detail::heat_rate(mid, p.dx, k2);
    for (std::size_t i = 0; i < N; ++i) out.f[i] += 0.5 * dt * (k1[i] + k2[i]);
  }
  out.t = p.t + T;
  return out;
}

struct DecayRow {
  double X = 0.0;  // annulus X <= |x| <= X_hi
  double X_hi = 0.0;
  double sup = 0.0;  // sup x^2 |d^k f / dx^k|
};

// Dyadic annuli [X, 2X] from X_lo, the last one clipped at X_max / 4.
inline std::vector<std::pair<double, double>> dyadic_annuli(double X_max, double X_lo = 10.0) {
  std::vector<std::pair<double, double>> a;
  const double top = 0.25 * X_max;
  for (double X = X_lo; X < top; X *= 2.0) a.emplace_back(X, std::min(2.0 * X, top));
  return a;
}

// Per annulus, sup of x^2 |f^{(k)}| with centered differences for k = 1, 2.
inline std::vector<DecayRow> decay_profile(const HeatProfile& p, int k,
                                           const std::vector<std::pair<double, double>>& annuli) {
  if (k < 0 || k > 2) throw ConfigError("decay_profile supports k = 0, 1, 2");
  const std::size_t N = p.size();
  auto deriv = [&](std::size_t i) {
    if (k == 0) return p.f[i];
    if (k == 1) return (p.f[i + 1] - p.f[i - 1]) / (2.0 * p.dx);
    return (p.f[i + 1] - 2.0 * p.f[i] + p.f[i - 1]) / (p.dx * p.dx);
  };
  std::vector<DecayRow> rows;
  for (const auto& [lo, hi] : annuli) {
    if (!(hi <= p.X_max - p.dx)) throw ConfigError("annulus reaches the boundary");
    DecayRow row{lo, hi, 0.0};
    for (std::size_t i = 1; i + 1 < N; ++i) {
      const double ax = std::abs(p.x[i]);
      if (ax < lo - 1e-12 || ax > hi + 1e-12) continue;
      row.sup = std::max(row.sup, ax * ax * std::abs(deriv(i)));
    }
    rows.push_back(row);
  }
  return rows;
}

// max |f_coarse - f_fine| over the coarse nodes, which must be nodes of the
// finer grid.
inline double max_difference_on(const HeatProfile& coarse, const HeatProfile& fine) {
  const double ratio = coarse.dx / fine.dx;
  const auto r = static_cast<std::size_t>(std::round(ratio));
  if (std::abs(ratio - static_cast<double>(r)) > 1e-9 || coarse.X_max != fine.X_max) {
    throw ConfigError("profiles are not nested");
  }
  double e = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) e = std::max(e, std::abs(coarse.f[i] - fine.f[i * r]));
  return e;
}

// Order p from errors at dx and dx/2, both against a dx/4 run:
// e(dx) / e(dx/2) = 2^p + 1.
inline double observed_order(double e_dx, double e_half) { return std::log2(e_dx / e_half - 1.0); }

}  // namespace rflow
