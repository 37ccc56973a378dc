#pragma once

// Radial grids r(xi) on an integer computational coordinate. Each node carries
// the analytic mapping derivatives so that finite differences can be taken in
// xi and converted with the chain rule.

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rflow/error.hpp"
#include "rflow/quadrature.hpp"

namespace rflow {

// Smooth step: 0 for x <= 0, 1 for x >= 1, C-infinity in between.
inline double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

enum class GridKind { uniform, geometric, center_sinh, clustered, slice, throat, center_clustered, collar };

class RadialGrid {
 public:
  // Nodes at r_i = h (i + 1/2), i = 0..n-1. Center regular (mirror parity).
  static RadialGrid uniform_centered(double r_max, std::size_t n) {
    check_count(n);
    const double h = r_max / (static_cast<double>(n) - 0.5);
    RadialGrid g(GridKind::uniform, true);
    for (std::size_t i = 0; i < n; ++i) {
      g.push(h * (static_cast<double>(i) + 0.5), h, 0.0);
    }
    return g;
  }

  // r_i = r_min + i h, i = 0..n-1, r_min > 0.
  static RadialGrid uniform(double r_min, double r_max, std::size_t n) {
    check_count(n);
    if (!(r_min > 0.0) || !(r_max > r_min)) throw ConfigError("uniform grid needs 0 < r_min < r_max");
    const double h = (r_max - r_min) / static_cast<double>(n - 1);
    RadialGrid g(GridKind::uniform, false);
    for (std::size_t i = 0; i < n; ++i) g.push(r_min + h * static_cast<double>(i), h, 0.0);
    return g;
  }

  // r_i = r_min q^i with the stretch factor q fixed by r_max.
  static RadialGrid geometric(double r_min, double r_max, std::size_t n) {
    check_count(n);
    if (!(r_min > 0.0) || !(r_max > r_min)) throw ConfigError("geometric grid needs 0 < r_min < r_max");
    const double lq = std::log(r_max / r_min) / static_cast<double>(n - 1);
    RadialGrid g(GridKind::geometric, false);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = r_min * std::exp(lq * static_cast<double>(i));
      g.push(r, r * lq, r * lq * lq);
    }
    g.r_.back() = r_max;
    return g;
  }

  // Geometric grid staggered about a minimal sphere r_t, r_i = r_t q^{i + 1/2}.
  // Fields are continued across r_t by the inversion r -> r_t^2 / r, which is
  // an isometry of isotropic Schwarzschild with r_t = m/2, so no inner boundary
  // condition is needed.
  static RadialGrid throat(double r_t, double r_max, std::size_t n) {
    check_count(n);
    if (!(r_t > 0.0) || !(r_max > r_t)) throw ConfigError("throat grid needs 0 < r_t < r_max");
    const double lq = std::log(r_max / r_t) / (static_cast<double>(n) - 0.5);
    RadialGrid g(GridKind::throat, false);
    g.throat_ = r_t;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = r_t * std::exp(lq * (static_cast<double>(i) + 0.5));
      g.push(r, r * lq, r * lq * lq);
    }
    g.r_.back() = r_max;
    return g;
  }

  // Center-regular grid r(xi) = a sinh(b xi), xi = i + 1/2. Spacing is h0 at the
  // center and grows geometrically with relative rate ~b far out.
  static RadialGrid center_sinh(double h0, double r_max, std::size_t n) {
    check_count(n);
    if (!(h0 > 0.0) || !(r_max > h0 * static_cast<double>(n))) {
      // a uniform grid already reaches r_max: fall back to it
      if (h0 > 0.0 && r_max > 0.0 && r_max <= h0 * static_cast<double>(n)) return uniform_centered(r_max, n);
      throw ConfigError("center_sinh grid needs h0 > 0");
    }
    const double xi_end = static_cast<double>(n) - 0.5;
    // solve (h0/b) sinh(b xi_end) = r_max for b
    double lo = 1e-12, hi = 50.0 / xi_end;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double val = h0 / mid * std::sinh(mid * xi_end);
      (val > r_max ? hi : lo) = mid;
    }
    const double b = 0.5 * (lo + hi);
    const double a = h0 / b;
    RadialGrid g(GridKind::center_sinh, true);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = static_cast<double>(i) + 0.5;
      g.push(a * std::sinh(b * xi), a * b * std::cosh(b * xi), a * b * b * std::sinh(b * xi));
    }
    return g;
  }

  // Center-regular grid, uniform (staggered, r_i = h (i + 1/2)) up to r_uniform
  // with r_c on a node and h <= h_c, then spacing growing like exp(growth * i)
  // after a smooth ramp of width `ramp_width` in r, until r_max is passed.
  static RadialGrid center_clustered(double r_c, double h_c, double r_uniform, double r_max, double growth = 0.02,
                                     double ramp_width = 0.5) {
    if (!(r_c > 0.0 && h_c > 0.0 && r_uniform >= r_c && r_max > r_uniform && growth > 0.0 && ramp_width > 0.0)) {
      throw ConfigError("center_clustered grid needs 0 < r_c <= r_uniform < r_max and positive spacing");
    }
    const double ic = std::ceil(r_c / h_c - 0.5);
    const double h = r_c / (ic + 0.5);
    const double xi1 = r_uniform / h;
    const double ramp = std::max(40.0, ramp_width / h);
    auto ramp_fn = [=](double xi) { return smooth_step((xi - xi1) / ramp); };
    const auto rule = gauss_legendre(8, 0.0, 1.0);
    // integral of ramp_fn over [a, b]
    auto integral = [&](double a, double b) {
      if (b <= xi1) return 0.0;
      a = std::max(a, xi1);
      double s = 0.0;
      for (std::size_t k = 0; k < rule.x.size(); ++k) s += rule.w[k] * ramp_fn(a + (b - a) * rule.x[k]);
      return s * (b - a);
    };
    RadialGrid g(GridKind::center_clustered, true);
    double xi = 0.5, r = 0.5 * h, G = 0.0;
    for (std::size_t i = 0;; ++i) {
      const double sp = h * std::exp(growth * G);
      g.push(r, sp, sp * growth * ramp_fn(xi));
      if (r >= r_max) break;
      if (i > 50'000'000) throw ConfigError("center_clustered grid does not reach r_max");
      // advance r and G by one unit of xi with nested quadrature for G
      double dr = 0.0;
      for (std::size_t k = 0; k < rule.x.size(); ++k) {
        const double x = xi + rule.x[k];
        dr += rule.w[k] * h * std::exp(growth * (G + integral(xi, x)));
      }
      G += integral(xi, xi + 1.0);
      xi += 1.0;
      r = xi <= xi1 ? h * xi : r + dr;
    }
    check_count(g.size());
    return g;
  }

  // Center-regular grid refined about a sphere r0: dr/dxi = rho S(r) with
  // spacing h_c for |r - r0| < half_width, h_far near the center, smooth
  // log-linear transitions of width `transition`, and spacing ~ growth r past
  // the collar region. rho ~ 1 is fixed so that r0 falls on a node.
  static RadialGrid collar(double r0, double h_c, double half_width, double r_max, double h_far = 0.005,
                           double growth = 0.01, double transition = 1.0) {
    if (!(h_c > 0.0 && h_far >= h_c && half_width > 0.0 && transition > 0.0 && growth > 0.0)) {
      throw ConfigError("collar grid needs positive spacings with h_far >= h_c");
    }
    if (!(r0 - half_width - transition > 2.0 * h_far && r_max > r0 + half_width + transition)) {
      throw ConfigError("collar grid needs the refined region inside (0, r_max)");
    }
    const double r_out = r0 + half_width + transition;
    const double lc = std::log(h_c), lf = std::log(h_far);
    auto S = [=](double r) {
      const double c = smooth_step((std::abs(r - r0) - half_width) / transition);
      const double o = smooth_step((r - r_out) / (3.0 * r_out));
      return std::exp(lc + (lf - lc) * c + o * std::log1p(growth * r / h_far));
    };
    // xi(r0) by composite Gauss-Legendre, panels no wider than the local spacing
    const auto rule = gauss_legendre(8, 0.0, 1.0);
    double xi0 = 0.0;
    for (double a = 0.0; a < r0;) {
      const double b = std::min(r0, a + S(a));
      for (std::size_t k = 0; k < rule.x.size(); ++k) xi0 += rule.w[k] * (b - a) / S(a + (b - a) * rule.x[k]);
      a = b;
    }
    const double i0 = std::max(1.0, std::round(xi0 - 0.5));
    const double rho = xi0 / (i0 + 0.5);
    auto F = [&](double r) { return rho * S(r); };
    auto dF = [&](double r) {
      const double d = 1e-3 * F(r);
      return (-F(r + 2 * d) + 8 * F(r + d) - 8 * F(r - d) + F(r - 2 * d)) / (12 * d);
    };
    // RK4 in xi with 8 substeps per unit
    auto advance = [&](double r, double dxi) {
      const int m = 8;
      const double h = dxi / m;
      for (int k = 0; k < m; ++k) {
        const double k1 = F(r), k2 = F(r + 0.5 * h * k1), k3 = F(r + 0.5 * h * k2), k4 = F(r + h * k3);
        r += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
      }
      return r;
    };
    RadialGrid g(GridKind::collar, true);
    double r = advance(0.0, 0.5);
    for (std::size_t i = 0;; ++i) {
      if (static_cast<double>(i) == i0) {
        if (std::abs(r - r0) > 1e-9 * r0) throw ConfigError("collar grid failed to place r0 on a node");
        r = r0;
        g.feature_index_ = i;
      }
      const double f = F(r);
      g.push(r, f, f * dF(r));
      if (r >= r_max) break;
      if (i > 50'000'000) throw ConfigError("collar grid does not reach r_max");
      r = advance(r, 1.0);
    }
    check_count(g.size());
    return g;
  }

  // r(xi) = r_c + a sinh(b (xi - xi_c)) on xi in [0, n-1], with minimum spacing
  // h_c at r_c (which is placed exactly on a node) and r(0) = r_min, r(n-1) >= r_max.
  static RadialGrid clustered(double r_min, double r_max, double r_c, double h_c, double rel_growth) {
    if (!(r_min > 0.0 && r_c > r_min && r_max > r_c && h_c > 0.0 && rel_growth > 0.0)) {
      throw ConfigError("clustered grid needs 0 < r_min < r_c < r_max and positive spacing");
    }
    const double xi_in = std::ceil(std::asinh((r_c - r_min) * rel_growth / h_c) / rel_growth);
    // adjust b (keeping a b = h_c) so node 0 lands exactly on r_min
    double lo = 1e-9, hi = rel_growth;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double val = h_c / mid * std::sinh(mid * xi_in);
      (val > r_c - r_min ? hi : lo) = mid;
    }
    const double b = 0.5 * (lo + hi);
    const double a = h_c / b;
    const double xi_out = std::ceil(std::asinh((r_max - r_c) / a) / b);
    const std::size_t n = static_cast<std::size_t>(xi_in + xi_out) + 1;
    check_count(n);
    RadialGrid g(GridKind::clustered, false);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = static_cast<double>(i) - xi_in;
      g.push(r_c + a * std::sinh(b * s), a * b * std::cosh(b * s), a * b * b * std::sinh(b * s));
    }
    g.r_.front() = r_min;
    g.feature_index_ = static_cast<std::size_t>(xi_in);
    g.r_[g.feature_index_] = r_c;
    return g;
  }

  // Nodes [first, last] of another grid. The slice is never center regular
  // unless it starts at node 0 of a center-regular grid.
  RadialGrid slice(std::size_t first, std::size_t last) const {
    if (last >= size() || first > last) throw ConfigError("bad grid slice");
    RadialGrid g(GridKind::slice, center_regular_ && first == 0);
    if (first == 0) g.throat_ = throat_;
    for (std::size_t i = first; i <= last; ++i) g.push(r_[i], r_xi_[i], r_xixi_[i]);
    return g;
  }

  static RadialGrid from_nodes(std::vector<double> r, bool center_regular) {
    check_count(r.size());
    RadialGrid g(GridKind::slice, center_regular);
    const std::size_t n = r.size();
    for (std::size_t i = 0; i < n; ++i) {
      // second-order mapping derivatives of the node sequence
      double rx, rxx;
      if (i == 0) {
        rx = -1.5 * r[0] + 2.0 * r[1] - 0.5 * r[2];
        rxx = r[0] - 2.0 * r[1] + r[2];
      } else if (i + 1 == n) {
        rx = 1.5 * r[n - 1] - 2.0 * r[n - 2] + 0.5 * r[n - 3];
        rxx = r[n - 1] - 2.0 * r[n - 2] + r[n - 3];
      } else {
        rx = 0.5 * (r[i + 1] - r[i - 1]);
        rxx = r[i + 1] - 2.0 * r[i] + r[i - 1];
      }
      g.push(r[i], rx, rxx);
    }
    g.validate();
    return g;
  }

  std::size_t size() const { return r_.size(); }
  double operator[](std::size_t i) const { return r_[i]; }
  const std::vector<double>& nodes() const { return r_; }
  double r_xi(std::size_t i) const { return r_xi_[i]; }
  double r_xixi(std::size_t i) const { return r_xixi_[i]; }
  double r_min() const { return r_.front(); }
  double r_max() const { return r_.back(); }
  bool center_regular() const { return center_regular_; }
  // Radius of the inversion sphere, 0 when the grid has none.
  double throat_radius() const { return throat_; }
  // True when stencils may reach past node 0 through a symmetry.
  bool mirrored() const { return center_regular_ || throat_ > 0.0; }
  GridKind kind() const { return kind_; }
  // Node that a clustered grid was built around.
  std::size_t feature_index() const { return feature_index_; }

  // Local spacing (distance to the nearer neighbour on the larger side).
  double spacing(std::size_t i) const {
    if (i + 1 < size()) return r_[i + 1] - r_[i];
    return r_[i] - r_[i - 1];
  }
  double min_spacing() const {
    double h = spacing(0);
    for (std::size_t i = 1; i < size(); ++i) h = std::min(h, spacing(i));
    return h;
  }

  // First node with r_i >= r.
  std::size_t lower_index(double r) const {
    std::size_t lo = 0, hi = size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (r_[mid] < r) lo = mid + 1; else hi = mid;
    }
    return lo;
  }
  // Node closest to r.
  std::size_t nearest_index(double r) const {
    std::size_t i = lower_index(r);
    if (i >= size()) return size() - 1;
    if (i > 0 && std::abs(r_[i - 1] - r) < std::abs(r_[i] - r)) return i - 1;
    return i;
  }

  void validate() const {
    check_count(size());
    for (std::size_t i = 1; i < size(); ++i) {
      if (!(r_[i] > r_[i - 1])) throw ConfigError("grid nodes must be strictly increasing");
    }
    if (r_.front() < 0.0) throw ConfigError("grid nodes must be non-negative");
  }

  static constexpr std::size_t kMinNodes = 64;

 private:
  RadialGrid(GridKind kind, bool center_regular) : kind_(kind), center_regular_(center_regular) {}

  static void check_count(std::size_t n) {
    if (n < kMinNodes) throw ConfigError("radial grid needs at least 64 nodes, got " + std::to_string(n));
  }

  void push(double r, double rx, double rxx) {
    r_.push_back(r);
    r_xi_.push_back(rx);
    r_xixi_.push_back(rxx);
  }

  GridKind kind_;
  bool center_regular_;
  double throat_ = 0.0;
  std::size_t feature_index_ = 0;
  std::vector<double> r_, r_xi_, r_xixi_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr share(RadialGrid g) {
  g.validate();
  return std::make_shared<const RadialGrid>(std::move(g));
}

// Weight function: 1 for r <= 1, r for r >= 2, cubic Hermite blend on [1, 2].
inline double rho(double r) {
  r = std::abs(r);
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return r;
  const double s = r - 1.0;
  // p(0)=1, p'(0)=0, p(1)=2, p'(1)=1
  const double h00 = 2 * s * s * s - 3 * s * s + 1;
  const double h01 = -2 * s * s * s + 3 * s * s;
  const double h11 = s * s * s - s * s;
  return 1.0 * h00 + 2.0 * h01 + 1.0 * h11;
}

inline double rho_prime(double r) {
  r = std::abs(r);
  if (r <= 1.0) return 0.0;
  if (r >= 2.0) return 1.0;
  const double s = r - 1.0;
  return (6 * s * s - 6 * s) + 2.0 * (-6 * s * s + 6 * s) + (3 * s * s - 2 * s);
}

// Area of the unit (n-1)-sphere in R^n.
inline double sphere_area(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace rflow
