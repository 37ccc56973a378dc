#pragma once

// Brute-force Cartesian oracles. The metric g_ij(x) = B delta_ij + (A - B) x_i x_j / r^2
// is assembled from the closed-form profile at arbitrary points and all
// derivatives are nested 4th-order centered finite differences in x. Nothing
// here uses the radial reductions, so it serves as an independent check on them.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "rflow/grid.hpp"
#include "rflow/metric.hpp"
#include "rflow/quadrature.hpp"

namespace rflow::oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using MetricField = std::function<Mat(const Vec&)>;

inline MetricField cartesian(const Profile& p, int n) {
  return [p, n](const Vec& x) {
    const double r = x.norm();
    const double A = p.A(r), B = p.B(r);
    Mat g = B * Mat::Identity(n, n);
    g += (A - B) / (r * r) * (x * x.transpose());
    return g;
  };
}

inline MetricField flat_field(int n) {
  return [n](const Vec&) { return Mat(Mat::Identity(n, n)); };
}

inline Vec on_axis(int n, double r) {
  Vec x = Vec::Zero(n);
  x(0) = r;
  return x;
}

// Generic 4th-order centered derivative of a vector-valued function of x.
template <class F>
auto fd(const F& f, const Vec& x, int k, double h) {
  Vec e = Vec::Zero(x.size());
  e(k) = h;
  return ((-f(Vec(x + 2 * e)) + 8.0 * f(Vec(x + e)) - 8.0 * f(Vec(x - e)) + f(Vec(x - 2 * e))) / (12.0 * h)).eval();
}

// Christoffel symbols G[k](i, j) = Gamma^k_ij.
using Christoffel = std::vector<Mat>;

class Evaluator {
 public:
  Evaluator(MetricField g, int n, double step = 1e-3) : g_(std::move(g)), n_(n), step_(step) {}

  int dim() const { return n_; }
  double h(const Vec& x) const { return step_ * std::max(1.0, x.norm()); }
  Mat metric(const Vec& x) const { return g_(x); }

  std::vector<Mat> dmetric(const Vec& x) const {
    std::vector<Mat> d(n_);
    for (int k = 0; k < n_; ++k) d[k] = fd(g_, x, k, h(x));
    return d;
  }

  Christoffel christoffel(const Vec& x) const {
    const Mat gi = metric(x).inverse();
    const auto d = dmetric(x);
    Christoffel G(n_, Mat::Zero(n_, n_));
    for (int k = 0; k < n_; ++k)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
          double s = 0.0;
          for (int m = 0; m < n_; ++m) s += gi(k, m) * (d[i](m, j) + d[j](m, i) - d[m](i, j));
          G[k](i, j) = 0.5 * s;
        }
    return G;
  }

  // Derivatives dG[l][k](i, j) = d_l Gamma^k_ij by differencing the Christoffel map.
  std::vector<Christoffel> dchristoffel(const Vec& x) const {
    std::vector<Christoffel> out(n_, Christoffel(n_, Mat::Zero(n_, n_)));
    const double hs = 4.0 * h(x);
    for (int l = 0; l < n_; ++l) {
      Vec e = Vec::Zero(n_);
      e(l) = hs;
      const auto a = christoffel(x + 2 * e), b = christoffel(x + e), c = christoffel(x - e), d = christoffel(x - 2 * e);
      for (int k = 0; k < n_; ++k) out[l][k] = (-a[k] + 8.0 * b[k] - 8.0 * c[k] + d[k]) / (12.0 * hs);
    }
    return out;
  }

  Mat ricci(const Vec& x) const {
    const auto G = christoffel(x);
    const auto dG = dchristoffel(x);
    Mat Ric = Mat::Zero(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        double s = 0.0;
        for (int k = 0; k < n_; ++k) {
          s += dG[k][k](i, j) - dG[j][k](i, k);
          for (int l = 0; l < n_; ++l) s += G[k](k, l) * G[l](i, j) - G[k](j, l) * G[l](i, k);
        }
        Ric(i, j) = s;
      }
    return Ric;
  }

  double scalar_standard(const Vec& x) const { return (metric(x).inverse() * ricci(x)).trace(); }

  double ricci_norm_sq(const Vec& x) const {
    const Mat gi = metric(x).inverse();
    const Mat Ric = ricci(x);
    return (gi * Ric * gi * Ric).trace();
  }

  // V^i = |g|^{1/2} g^{ij} (Gamma_j - (1/2) d_j log|g|), Gamma_j = g_jk g^{pq} Gamma^k_pq.
  Vec divergence_field(const Vec& x) const {
    const Mat g = metric(x), gi = g.inverse();
    const auto d = dmetric(x);
    const auto G = christoffel(x);
    Vec up(n_), V(n_);
    for (int k = 0; k < n_; ++k) up(k) = (gi.cwiseProduct(G[k])).sum();
    const Vec low = g * up;
    Vec dlog(n_);
    for (int j = 0; j < n_; ++j) dlog(j) = (gi.cwiseProduct(d[j])).sum();
    V = std::sqrt(g.determinant()) * gi * (low - 0.5 * dlog);
    return V;
  }

  struct ScalarParts {
    double divergence = 0.0;  // |g|^{-1/2} d_i V^i
    double gamma_log = 0.0;   // g^{ij} Gamma_i d_j log|g|
    double gamma_sq = 0.0;    // g^{ij} g^{kl} g^{pq} Gamma_ikp Gamma_jql, Gamma_ikp = g_pm Gamma^m_ik
  };

  ScalarParts scalar_parts(const Vec& x) const {
    ScalarParts p;
    const Mat g = metric(x), gi = g.inverse();
    const auto d = dmetric(x);
    const auto G = christoffel(x);
    const double hs = 4.0 * h(x);
    double div = 0.0;
    for (int i = 0; i < n_; ++i) {
      auto Vi = [&](const Vec& y) {
        Vec out(1);
        out(0) = divergence_field(y)(i);
        return out;
      };
      div += fd(Vi, x, i, hs)(0);
    }
    p.divergence = div / std::sqrt(g.determinant());
    Vec up(n_);
    for (int k = 0; k < n_; ++k) up(k) = (gi.cwiseProduct(G[k])).sum();
    const Vec low = g * up;
    Vec dlog(n_);
    for (int j = 0; j < n_; ++j) dlog(j) = (gi.cwiseProduct(d[j])).sum();
    p.gamma_log = low.dot(gi * dlog);
    // The quadratic term reproduces R with the last index lowered:
    // Gamma_ikp = g_pm Gamma^m_ik.
    std::vector<Mat> Gl(n_, Mat::Zero(n_, n_));  // Gl[p](i, k) = g_pm Gamma^m_ik
    for (int pp = 0; pp < n_; ++pp)
      for (int m = 0; m < n_; ++m) Gl[pp] += g(pp, m) * G[m];
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k)
          for (int l = 0; l < n_; ++l)
            for (int pp = 0; pp < n_; ++pp)
              for (int q = 0; q < n_; ++q) s += gi(i, j) * gi(k, l) * gi(pp, q) * Gl[pp](i, k) * Gl[l](j, q);
    p.gamma_sq = s;
    return p;
  }

  // Scalar curvature assembled from the divergence form
  //   R = |g|^{-1/2} d_i V^i - (1/2) g^{ij} Gamma_i d_j log|g| + g^{ij} g^{kl} g^{pq} Gamma_ikp Gamma_jql.
  double scalar_divergence_form(const Vec& x) const {
    const auto p = scalar_parts(x);
    return p.divergence - 0.5 * p.gamma_log + p.gamma_sq;
  }

  // Mean curvature of the sphere |x| = r through x: div_g of the unit normal.
  double mean_curvature(const Vec& x) const {
    auto flux = [this](const Vec& y) {
      const Mat gi = metric(y).inverse();
      const Vec dr = y / y.norm();
      const Vec nu = gi * dr / std::sqrt(dr.dot(gi * dr));
      return Vec(std::sqrt(metric(y).determinant()) * nu);
    };
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += fd(flux, x, i, h(x))(i);
    return s / std::sqrt(metric(x).determinant());
  }

  // Euclidean flux integrand (g_ij,j - g_jj,i) xh_i.
  double mass_integrand(const Vec& x) const {
    const auto d = dmetric(x);
    const Vec xh = x / x.norm();
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += (d[j](i, j) - d[i](j, j)) * xh(i);
    return s;
  }

 private:
  MetricField g_;
  int n_;
  double step_;
};

// DeTurck field W_j = g_jk g^{pq} (Gamma^k_pq - Gammat^k_pq).
inline Vec deturck(const Evaluator& g, const Evaluator& h, const Vec& x) {
  const int n = g.dim();
  const Mat gm = g.metric(x), gi = gm.inverse();
  const auto G = g.christoffel(x), H = h.christoffel(x);
  Vec up(n);
  for (int k = 0; k < n; ++k) up(k) = (gi.cwiseProduct(G[k] - H[k])).sum();
  return gm * up;
}

// ADM flux by brute-force quadrature of (g_ij,j - g_jj,i) dS^i over the sphere of
// radius r. n = 3 uses a Gauss-Legendre x uniform product grid; for n >= 4 the
// integrand is rotationally invariant about the polar axis and reduces to a
// polar-angle integral with weight omega_{n-2} sin^{n-2} theta.
inline double flux_quadrature(const Evaluator& e, double r, int polar = 100, int azimuth = 200) {
  const int n = e.dim();
  if (n == 3) {
    const auto rule = gauss_legendre(polar);
    double s = 0.0;
    for (int a = 0; a < polar; ++a) {
      const double mu = rule.x[a], st = std::sqrt(1.0 - mu * mu);
      for (int b = 0; b < azimuth; ++b) {
        const double ph = 2.0 * std::numbers::pi * (b + 0.5) / azimuth;
        Vec x(3);
        x << r * st * std::cos(ph), r * st * std::sin(ph), r * mu;
        s += rule.w[a] * (2.0 * std::numbers::pi / azimuth) * e.mass_integrand(x);
      }
    }
    return s * r * r;
  }
  const auto rule = gauss_legendre(polar, 0.0, std::numbers::pi);
  double s = 0.0;
  for (int a = 0; a < polar; ++a) {
    const double th = rule.x[a];
    Vec x = Vec::Zero(n);
    x(0) = r * std::cos(th);
    x(1) = r * std::sin(th);
    s += rule.w[a] * std::pow(std::sin(th), n - 2) * e.mass_integrand(x);
  }
  return s * sphere_area(n - 1) * std::pow(r, n - 1);
}

}  // namespace rflow::oracle
