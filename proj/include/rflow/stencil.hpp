#pragma once

// Finite differences on mapped radial grids. Derivatives are taken in the
// computational coordinate xi (unit spacing) and converted with
//   f_r = f_xi / r_xi,   f_rr = (f_xixi - r_xixi f_r) / r_xi^2.
// Interior nodes use 4th-order centered stencils, the two outermost nodes at
// a physical boundary 2nd-order stencils. Center-regular grids are extended
// across r = 0 by parity, throat grids across r_t by inversion.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rflow/grid.hpp"

namespace rflow {

// How a field continues past node 0. `metric` marks the radial profiles A, B:
// even at a regular center, and weighted by (r / r_t)^4 under inversion so that
// A r^2 and B r^2 are even in log(r / r_t). Odd fields are radial vector
// components v of v d_r.
enum class Parity { even, odd, metric };

struct Derivatives {
  std::vector<double> d1;
  std::vector<double> d2;
};

namespace detail {

struct Extended {
  std::span<const double> f;
  bool mirrored;
  double sign;
  const RadialGrid* grid = nullptr;  // set for inversion
  double power = 0.0;
  double operator()(long j) const {
    if (j >= 0) return f[static_cast<std::size_t>(j)];
    const auto src = static_cast<std::size_t>(-1 - j);
    if (!grid) return sign * f[src];
    return sign * std::pow((*grid)[src] / grid->throat_radius(), power) * f[src];
  }
};

inline Extended extend(const RadialGrid& grid, std::span<const double> f, Parity parity) {
  Extended e{f, grid.mirrored(), parity == Parity::odd ? -1.0 : 1.0};
  if (grid.throat_radius() > 0.0) {
    e.grid = &grid;
    e.power = parity == Parity::metric ? 4.0 : parity == Parity::odd ? -2.0 : 0.0;
  }
  return e;
}

// xi-derivatives at node i, returns {f_xi, f_xixi}
inline std::pair<double, double> xi_derivs(const Extended& e, long i, long n) {
  const bool lo4 = e.mirrored || i >= 2;
  const bool lo2 = e.mirrored || i >= 1;
  if (lo4 && i + 2 < n) {
    const double fm2 = e(i - 2), fm1 = e(i - 1), f0 = e(i), fp1 = e(i + 1), fp2 = e(i + 2);
    return {(-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / 12.0,
            (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / 12.0};
  }
  if (lo2 && i + 1 < n) {
    const double fm1 = e(i - 1), f0 = e(i), fp1 = e(i + 1);
    return {0.5 * (fp1 - fm1), fp1 - 2.0 * f0 + fm1};
  }
  if (!lo2) {
    const double f0 = e(i), f1 = e(i + 1), f2 = e(i + 2), f3 = e(i + 3);
    return {-1.5 * f0 + 2.0 * f1 - 0.5 * f2, 2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3};
  }
  const double f0 = e(i), f1 = e(i - 1), f2 = e(i - 2), f3 = e(i - 3);
  return {1.5 * f0 - 2.0 * f1 + 0.5 * f2, 2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3};
}

}  // namespace detail

inline Derivatives differentiate(const RadialGrid& grid, std::span<const double> f, Parity parity = Parity::even) {
  const long n = static_cast<long>(grid.size());
  const auto e = detail::extend(grid, f, parity);
  Derivatives out;
  out.d1.resize(f.size());
  out.d2.resize(f.size());
  for (long i = 0; i < n; ++i) {
    const auto [fx, fxx] = detail::xi_derivs(e, i, n);
    const auto k = static_cast<std::size_t>(i);
    const double rx = grid.r_xi(k);
    const double fr = fx / rx;
    out.d1[k] = fr;
    out.d2[k] = (fxx - grid.r_xixi(k) * fr) / (rx * rx);
  }
  return out;
}

inline std::vector<double> first_derivative(const RadialGrid& grid, std::span<const double> f,
                                            Parity parity = Parity::even) {
  return differentiate(grid, f, parity).d1;
}

enum class Side { inner, outer };

// One-sided 4th-order first and second r-derivatives at node i using only
// nodes on the given side (inclusive of i).
inline std::pair<double, double> one_sided_derivs(const RadialGrid& grid, std::span<const double> f, std::size_t i,
                                                  Side side) {
  const double s = side == Side::outer ? 1.0 : -1.0;
  auto at = [&](int k) {
    const long j = static_cast<long>(i) + (side == Side::outer ? k : -k);
    return f[static_cast<std::size_t>(j)];
  };
  if ((side == Side::outer && i + 5 >= grid.size()) || (side == Side::inner && i < 5)) {
    throw ConfigError("one-sided stencil runs off the grid");
  }
  const double fx = s * (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) / 12.0;
  const double fxx =
      (45.0 * at(0) - 154.0 * at(1) + 214.0 * at(2) - 156.0 * at(3) + 61.0 * at(4) - 10.0 * at(5)) / 12.0;
  const double rx = grid.r_xi(i);
  const double fr = fx / rx;
  return {fr, (fxx - grid.r_xixi(i) * fr) / (rx * rx)};
}

// Local Lagrange interpolation through `points` nodes of [lo, hi] nearest to r.
inline double interpolate(const RadialGrid& grid, std::span<const double> f, double r, int points = 6,
                          std::size_t lo = 0, std::size_t hi = static_cast<std::size_t>(-1)) {
  hi = std::min(hi, grid.size() - 1);
  const long width = std::min<long>(points, static_cast<long>(hi - lo + 1));
  long start = static_cast<long>(grid.lower_index(r)) - width / 2;
  start = std::clamp(start, static_cast<long>(lo), static_cast<long>(hi) - width + 1);
  double acc = 0.0;
  for (long a = 0; a < width; ++a) {
    const auto ia = static_cast<std::size_t>(start + a);
    double w = 1.0;
    for (long b = 0; b < width; ++b) {
      if (a == b) continue;
      const auto ib = static_cast<std::size_t>(start + b);
      w *= (r - grid[ib]) / (grid[ia] - grid[ib]);
    }
    acc += w * f[ia];
  }
  return acc;
}

// Trapezoid integral of f(r) dr over nodes [first, last].
inline double trapezoid(const RadialGrid& grid, std::span<const double> f, std::size_t first, std::size_t last) {
  double s = 0.0;
  for (std::size_t i = first; i < last; ++i) s += 0.5 * (f[i] + f[i + 1]) * (grid[i + 1] - grid[i]);
  return s;
}

// Integral over nodes [first, last] using Simpson's rule in xi on the mapped
// integrand f r_xi (4th order on smooth data); falls back to trapezoid at an
// odd tail.
inline double integrate_xi(const RadialGrid& grid, std::span<const double> f, std::size_t first, std::size_t last) {
  if (last <= first) return 0.0;
  auto w = [&](std::size_t i) { return f[i] * grid.r_xi(i); };
  double s = 0.0;
  std::size_t i = first;
  for (; i + 2 <= last; i += 2) s += (w(i) + 4.0 * w(i + 1) + w(i + 2)) / 3.0;
  if (i < last) s += 0.5 * (w(i) + w(i + 1));
  return s;
}

}  // namespace rflow
