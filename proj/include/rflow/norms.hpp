#pragma once

// Weighted Hölder norms
//   |f|_{k,alpha,delta} = sum_j sup rho^{delta+j} |grad^j f|
//                       + sup min(rho(x), rho(y))^{delta+k+alpha} |grad^k f(x) - grad^k f(y)| / |x - y|^alpha
// for radial scalars and for the difference of two radial metrics, with
// derivatives taken against the flat background. The seminorm is sampled over
// node pairs on one ray with |x - y| <= rho/2, so it is a lower bound.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "rflow/curvature.hpp"
#include "rflow/metric.hpp"
#include "rflow/tensor_jet.hpp"

namespace rflow {

struct WeightedNormReport {
  int k = 0;
  double alpha = 0.0;
  double delta = 0.0;
  double value = 0.0;     // sum of the terms
  double max_term = 0.0;  // largest single term
  std::vector<double> sup_terms;  // sup rho^{delta+j} |grad^j f|, j = 0..k
  double holder = 0.0;
};

// Flattened components of grad^level f at node i; Euclidean length of the
// vector is |grad^level f| and componentwise differences give the difference norm.
using JetComponents = std::function<void(std::size_t i, int level, std::vector<double>& out)>;

inline WeightedNormReport weighted_norm(const RadialGrid& grid, const JetComponents& comp, int k, double alpha,
                                        double delta) {
  if (k < 0 || k > 2) throw ConfigError("weighted norm supports k <= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("Hölder exponent must lie in (0, 1)");
  WeightedNormReport rep;
  rep.k = k;
  rep.alpha = alpha;
  rep.delta = delta;
  rep.sup_terms.assign(k + 1, 0.0);
  const std::size_t N = grid.size();
  std::vector<std::vector<double>> top(N);
  std::vector<double> buf;
  for (std::size_t i = 0; i < N; ++i) {
    const double rh = rho(grid[i]);
    for (int j = 0; j <= k; ++j) {
      comp(i, j, buf);
      double s = 0.0;
      for (double v : buf) s += v * v;
      rep.sup_terms[j] = std::max(rep.sup_terms[j], std::pow(rh, delta + j) * std::sqrt(s));
      if (j == k) top[i] = buf;
    }
  }
  for (std::size_t i = 0; i < N; ++i) {
    const double ri = rho(grid[i]);
    for (std::size_t j = i + 1; j < N && grid[j] - grid[i] <= 0.5 * ri; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < top[i].size(); ++c) {
        const double d = top[i][c] - top[j][c];
        s += d * d;
      }
      const double w = std::pow(std::min(ri, rho(grid[j])), delta + k + alpha);
      rep.holder = std::max(rep.holder, w * std::sqrt(s) / std::pow(grid[j] - grid[i], alpha));
    }
  }
  rep.value = rep.holder;
  rep.max_term = rep.holder;
  for (double t : rep.sup_terms) {
    rep.value += t;
    rep.max_term = std::max(rep.max_term, t);
  }
  return rep;
}

// Radial scalar f(r) in dimension n. The Hessian along a ray is
// diag(f'', f'/r, ..., f'/r).
inline WeightedNormReport weighted_norm(const RadialGrid& grid, int n, std::span<const double> f, int k, double alpha,
                                        double delta) {
  const auto d = differentiate(grid, f, Parity::even);
  JetComponents comp = [&](std::size_t i, int level, std::vector<double>& out) {
    if (level == 0) out.assign({f[i]});
    else if (level == 1) out.assign({d.d1[i]});
    else out.assign({d.d2[i], std::sqrt(n - 1.0) * d.d1[i] / grid[i]});
  };
  return weighted_norm(grid, comp, k, alpha, delta);
}

// Cartesian jets of eta = g - h at every node.
inline std::vector<jet::TensorJet> difference_jets(const RadialMetric& g, const RadialMetric& h) {
  if (g.size() != h.size() || g.n != h.n) throw ConfigError("metrics must share grid and dimension");
  const auto dg = derivs(g), dh = derivs(h);
  std::vector<jet::TensorJet> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto cg = jet::metric_coeffs(dg.A[i], dg.dA[i], dg.ddA[i], dg.B[i], dg.dB[i], dg.ddB[i]);
    const auto ch = jet::metric_coeffs(dh.A[i], dh.dA[i], dh.ddA[i], dh.B[i], dh.dB[i], dh.ddB[i]);
    jet::RadialCoeffs c{cg.p - ch.p, cg.dp - ch.dp, cg.ddp - ch.ddp, cg.q - ch.q, cg.dq - ch.dq, cg.ddq - ch.ddq};
    out[i] = jet::radial_jet(g.n, g.g()[i], c);
  }
  return out;
}

inline JetComponents tensor_components(const std::vector<jet::TensorJet>& jets) {
  return [&jets](std::size_t i, int level, std::vector<double>& out) {
    const auto& J = jets[i];
    const int n = J.n;
    out.clear();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (level == 0) {
          out.push_back(J.T(a, b));
          continue;
        }
        for (int c = 0; c < n; ++c) {
          if (level == 1) {
            out.push_back(J.D(c, a, b));
            continue;
          }
          for (int d = 0; d < n; ++d) out.push_back(J.DD(d, c, a, b));
        }
      }
  };
}

inline WeightedNormReport weighted_norm(const RadialMetric& g, const RadialMetric& h, int k, double alpha,
                                        double delta) {
  const auto jets = difference_jets(g, h);
  return weighted_norm(g.g(), tensor_components(jets), k, alpha, delta);
}

// sup rho^delta |eta|, sup rho^{delta+1} |grad eta|, sup rho^{delta+1} |grad^2 eta|
// over nodes with r >= r_from.
inline std::array<double, 3> eta_decay_terms(const RadialMetric& g, const RadialMetric& h, double delta,
                                             double r_from = 0.0) {
  const auto jets = difference_jets(g, h);
  std::array<double, 3> s{};
  const int n = g.n;
  for (std::size_t i = 0; i < jets.size(); ++i) {
    const double r = g.g()[i];
    if (r < r_from) continue;
    const auto& J = jets[i];
    double t0 = 0, t1 = 0, t2 = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        t0 += J.T(a, b) * J.T(a, b);
        for (int c = 0; c < n; ++c) {
          t1 += J.D(c, a, b) * J.D(c, a, b);
          for (int d = 0; d < n; ++d) t2 += J.DD(d, c, a, b) * J.DD(d, c, a, b);
        }
      }
    const double w = std::pow(rho(r), delta);
    s[0] = std::max(s[0], w * std::sqrt(t0));
    s[1] = std::max(s[1], w * rho(r) * std::sqrt(t1));
    s[2] = std::max(s[2], w * rho(r) * std::sqrt(t2));
  }
  return s;
}

struct FairnessReport {
  bool fair = false;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double curvature_bound = 0.0;  // max |sectional curvature| of h
};

// (1/f) h <= g <= f h componentwise in the radial and tangential directions,
// and the curvature of h is bounded.
inline FairnessReport is_delta_fair(const RadialMetric& h, const RadialMetric& g, double fairness) {
  if (g.size() != h.size()) throw ConfigError("metrics must share a grid");
  FairnessReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (double q : {g.A[i] / h.A[i], g.B[i] / h.B[i]}) {
      rep.min_ratio = std::min(rep.min_ratio, q);
      rep.max_ratio = std::max(rep.max_ratio, q);
    }
  }
  rep.curvature_bound = max_sectional_curvature(h);
  const double tol = 1e-12;
  rep.fair = std::isfinite(rep.curvature_bound) && rep.min_ratio >= 1.0 / fairness - tol &&
             rep.max_ratio <= fairness + tol;
  return rep;
}

}  // namespace rflow
