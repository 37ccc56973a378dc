#pragma once

// DeTurck h-flow dg/dt = -2 Ric(g) + L_W g with W^k = g^{pq} (Gamma^k_pq - Gammat^k_pq)
// on radial metrics. For W = v d/dr the flow reads
//   dA/dt = 2 (n-1) K_r A + v A' + 2 A v'
//   dB/dt = -2 lambda_t B + v (B' + 2 B / r)
// with K_r the radial sectional curvature and lambda_t the tangential Ricci
// eigenvalue. The principal part is A''/A and B''/A. The same right-hand side
// is also available literally from the eta = g - h evolution equation built
// on Cartesian jets (RhsForm::eta_equation).

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "rflow/curvature.hpp"
#include "rflow/metric.hpp"
#include "rflow/norms.hpp"
#include "rflow/tensor_jet.hpp"

namespace rflow {

enum class RhsForm { geometric, eta_equation };

// heun: explicit RK2 at the stable step. rosenbrock: linearly implicit ROS2
// with a banded finite-difference Jacobian and local error control, for grids
// whose finest spacing makes the explicit step impractical.
enum class Stepper { heun, rosenbrock };

struct FlowConfig {
  double T_final = 0.01;
  double cfl = 0.2;
  std::size_t snapshots = 10;  // snapshots at k T / snapshots
  std::size_t w_stride = 4;    // W is recorded every w_stride steps
  std::size_t frozen = 2;      // nodes held fixed at each physical boundary
  double K_target = 10.0;
  double fairness = 1.1;
  RhsForm rhs = RhsForm::geometric;
  std::size_t max_steps = 100'000'000;
  Stepper stepper = Stepper::heun;
  double tolerance = 1e-7;  // rosenbrock: local error per step, relative to max(|A|, |B|, 1)

  void validate() const {
    if (!(T_final > 0.0)) throw ConfigError("T_final must be positive");
    if (!(cfl > 0.0 && cfl <= 0.5)) throw ConfigError("cfl must lie in (0, 0.5]");
    if (snapshots == 0) throw ConfigError("need at least one snapshot interval");
    if (w_stride == 0) throw ConfigError("w_stride must be positive");
    if (!(fairness >= 1.0)) throw ConfigError("fairness must be >= 1");
    if (!(tolerance > 0.0 && tolerance < 1e-2)) throw ConfigError("tolerance must lie in (0, 1e-2)");
  }
};

struct NodeJet {
  double A, dA, ddA, B, dB, ddB;
};

inline NodeJet node(const MetricDerivs& d, std::size_t i) {
  return {d.A[i], d.dA[i], d.ddA[i], d.B[i], d.dB[i], d.ddB[i]};
}

// v and v' of W = v d/dr, written so that the 1/r terms cancel at a regular center:
//   v = A'/(2A^2) - Ah'/(2 A Ah) - (n-1) B'/(2 A B) + (n-1) Bh'/(2 Ah B)
//       + (n-1) (A Bh - Ah B) / (r A Ah B).
inline std::pair<double, double> deturck_value(int n, double r, const NodeJet& g, const NodeJet& h) {
  const double m = n - 1.0;
  const double A = g.A, A1 = g.dA, A2 = g.ddA, B = g.B, B1 = g.dB, B2 = g.ddB;
  const double a = h.A, a1 = h.dA, a2 = h.ddA, b = h.B, b1 = h.dB, b2 = h.ddB;
  const double t1 = A1 / (2 * A * A);
  const double t1p = A2 / (2 * A * A) - A1 * A1 / (A * A * A);
  const double t2 = -a1 / (2 * A * a);
  const double t2p = -a2 / (2 * A * a) + a1 * (A1 * a + A * a1) / (2 * A * A * a * a);
  const double t3 = -m * B1 / (2 * A * B);
  const double t3p = -m * (B2 / (2 * A * B) - B1 * (A1 * B + A * B1) / (2 * A * A * B * B));
  const double t4 = m * b1 / (2 * a * B);
  const double t4p = m * (b2 / (2 * a * B) - b1 * (a1 * B + a * B1) / (2 * a * a * B * B));
  const double N = A * b - a * B, N1 = A1 * b + A * b1 - a1 * B - a * B1;
  const double D = A * a * B, D1 = A1 * a * B + A * a1 * B + A * a * B1;
  const double t5 = m * N / (r * D);
  const double t5p = m * (N1 / (r * D) - N / (r * r * D) - N * D1 / (r * D * D));
  return {t1 + t2 + t3 + t4 + t5, t1p + t2p + t3p + t4p + t5p};
}

// Radial component v of the DeTurck vector W = v d/dr (the covector is A v dr).
inline std::vector<double> deturck_vector(const RadialMetric& g, const RadialMetric& h) {
  if (g.size() != h.size()) throw ConfigError("metrics must share a grid");
  const auto dg = derivs(g), dh = derivs(h);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = deturck_value(g.n, g.g()[i], node(dg, i), node(dh, i)).first;
  return v;
}

// Background that equals `base` inside r1 and the flat metric beyond 2 r1,
// joined by a smooth step. r1 is the smallest radius beyond which base stays
// within 1 + (fairness - 1)/2 of flat, so the result is fairness-fair to base.
inline RadialMetric blended_background(const RadialMetric& base, double fairness) {
  const double lim = 1.0 + 0.5 * (fairness - 1.0);
  auto excess = [&](std::size_t i) {
    const double a = base.A[i], b = base.B[i];
    return std::max({a, 1.0 / a, b, 1.0 / b}) - lim;
  };
  std::size_t k = base.size();
  while (k > 0 && excess(k - 1) <= 0.0) --k;
  if (k == 0) return build_flat(base.n, base.grid);
  // Locate the crossing between nodes so that r1 does not move with the grid.
  double r1 = base.g()[k - 1];
  if (k < base.size()) {
    const double e0 = excess(k - 1), e1 = excess(k);
    r1 += (base.g()[k] - r1) * e0 / (e0 - e1);
  }
  r1 = std::max(r1, base.g().r_min() * 1.5);
  if (2.0 * r1 >= base.g().r_max()) throw ConfigError("metric too far from flat for a blended background");
  auto blend = [r1](double r, double v) { return v + (1.0 - v) * smooth_step((r - r1) / r1); };
  RadialMetric h = base;
  h.name = base.name + "-background";
  for (std::size_t i = 0; i < h.size(); ++i) {
    h.A[i] = blend(h.g()[i], base.A[i]);
    h.B[i] = blend(h.g()[i], base.B[i]);
  }
  if (base.profile) {
    const Profile p = *base.profile;
    h.profile = Profile{[p, blend](double r) { return blend(r, p.A(r)); }, [p, blend](double r) { return blend(r, p.B(r)); }};
  }
  return h;
}

struct MetricRate {
  std::vector<double> A, B;
};

inline std::pair<double, double> geometric_rate(int n, double r, const NodeJet& g, const NodeJet& h) {
  const auto [v, dv] = deturck_value(n, r, g, h);
  const double cC = 1.0 / r + g.dB / (2.0 * g.B);
  const double cCC = g.dB / (r * g.B) + g.ddB / (2.0 * g.B) - g.dB * g.dB / (4.0 * g.B * g.B);
  const double Kr = (cCC - g.dA * cC / (2.0 * g.A)) / g.A;
  const auto e = ricci_eigen(n, r, g.A, g.dA, g.B, g.dB, g.ddB);
  return {2.0 * (n - 1) * Kr * g.A + v * g.dA + 2.0 * g.A * dv,
          -2.0 * e.tangential * g.B + v * (g.dB + 2.0 * g.B / r)};
}

// The eta = g - h evolution equation evaluated literally at x = r e_1:
//   d/dt eta_ab = g^{cd} Dt_c Dt_d eta_ab - g^{cd} g_ap h^{pq} Rt_bcqd - g^{cd} g_bp h^{pq} Rt_acqd
//     + (1/2) g^{cd} g^{pq} (Dt_a eta_pc Dt_b eta_qd + 2 Dt_c eta_ap Dt_q eta_bd
//                            - 2 Dt_c eta_ap Dt_d eta_bq - 4 Dt_a eta_pc Dt_d eta_bq),
// Dt the connection of h, Rt its curvature. Returns (dA/dt, dB/dt) = (rate_00, rate_11).
inline std::pair<double, double> eta_equation_rate(int n, double r, const NodeJet& g, const NodeJet& h) {
  using namespace jet;
  const auto Jg = radial_jet(n, r, metric_coeffs(g.A, g.dA, g.ddA, g.B, g.dB, g.ddB));
  const auto Jh = radial_jet(n, r, metric_coeffs(h.A, h.dA, h.ddA, h.B, h.dB, h.ddB));
  const auto Ch = connection(Jh);
  const auto Rt = riemann_lower(Ch);
  TensorJet E;
  E.n = n;
  for (std::size_t k = 0; k < E.T.v.size(); ++k) E.T.v[k] = Jg.T.v[k] - Jh.T.v[k];
  for (std::size_t k = 0; k < E.D.v.size(); ++k) E.D.v[k] = Jg.D.v[k] - Jh.D.v[k];
  for (std::size_t k = 0; k < E.DD.v.size(); ++k) E.DD.v[k] = Jg.DD.v[k] - Jh.DD.v[k];
  const auto& G = Ch.G;
  const auto& dG = Ch.dG;
  // N(k, i, j) = Dt_k eta_ij
  Rank3 N;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = E.D(k, i, j);
        for (int m = 0; m < n; ++m) s -= G(m, k, i) * E.T(m, j) + G(m, k, j) * E.T(i, m);
        N(k, i, j) = s;
      }
  // dN(c, d, a, b) = d_c (Dt_d eta_ab)
  auto dN = [&](int c, int d, int a, int b) {
    double s = E.DD(c, d, a, b);
    for (int m = 0; m < n; ++m) {
      s -= dG(c, m, d, a) * E.T(m, b) + G(m, d, a) * E.D(c, m, b);
      s -= dG(c, m, d, b) * E.T(a, m) + G(m, d, b) * E.D(c, a, m);
    }
    return s;
  };
  auto hess = [&](int c, int d, int a, int b) {
    double s = dN(c, d, a, b);
    for (int m = 0; m < n; ++m) s -= G(m, c, d) * N(m, a, b) + G(m, c, a) * N(d, m, b) + G(m, c, b) * N(d, a, m);
    return s;
  };
  std::array<double, kMaxDim> gi{}, gl{}, hi{};
  for (int i = 0; i < n; ++i) {
    gl[i] = Jg.T(i, i);
    gi[i] = 1.0 / gl[i];
    hi[i] = 1.0 / Jh.T(i, i);
  }
  auto rate = [&](int a, int b) {
    double s = 0.0;
    for (int c = 0; c < n; ++c) s += gi[c] * hess(c, c, a, b);
    for (int c = 0; c < n; ++c) {
      s -= gi[c] * gl[a] * hi[a] * Rt(b, c, a, c);
      s -= gi[c] * gl[b] * hi[b] * Rt(a, c, b, c);
    }
    double q = 0.0;
    for (int c = 0; c < n; ++c)
      for (int p = 0; p < n; ++p)
        q += gi[c] * gi[p] *
             (N(a, p, c) * N(b, p, c) + 2.0 * N(c, a, p) * N(p, b, c) - 2.0 * N(c, a, p) * N(c, b, p) -
              4.0 * N(a, p, c) * N(c, b, p));
    return s + 0.5 * q;
  };
  return {rate(0, 0), rate(1, 1)};
}

inline MetricRate flow_rhs(const RadialMetric& g, const MetricDerivs& dg, const MetricDerivs& dh, RhsForm form) {
  MetricRate out{std::vector<double>(g.size()), std::vector<double>(g.size())};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.g()[i];
    const auto rate = form == RhsForm::geometric ? geometric_rate(g.n, r, node(dg, i), node(dh, i))
                                                 : eta_equation_rate(g.n, r, node(dg, i), node(dh, i));
    out.A[i] = rate.first;
    out.B[i] = rate.second;
  }
  return out;
}

inline MetricRate flow_rhs(const RadialMetric& g, const RadialMetric& h, RhsForm form = RhsForm::geometric) {
  return flow_rhs(g, derivs(g), derivs(h), form);
}

// Largest stable explicit step: cfl * min_i(dr_i^2 A_i) / (2n).
inline double stable_dt(const RadialMetric& g, double cfl) {
  double s = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double dr = g.g().spacing(i);
    s = std::min(s, dr * dr * g.A[i]);
  }
  return cfl * s / (2.0 * g.n);
}

struct FlowState {
  double t = 0.0;
  RadialMetric g;
  std::shared_ptr<const RadialMetric> h;
  std::vector<double> W;  // v of W = v d/dr
  double max_grad_eta = 0.0;
  std::array<double, 3> decay{};  // sup rho^d |eta|, rho^{d+1} |grad eta|, rho^{d+1} |grad^2 eta|

  std::vector<double> eta_A() const {
    std::vector<double> e(g.A);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] -= h->A[i];
    return e;
  }
  std::vector<double> eta_B() const {
    std::vector<double> e(g.B);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] -= h->B[i];
    return e;
  }
};

// W samples recorded during the run, used by the diffeomorphism extraction.
struct WHistory {
  std::vector<double> t;
  std::vector<std::vector<double>> v;
};

struct FlowTrajectory {
  std::vector<FlowState> snapshots;
  std::vector<double> dt_history;
  WHistory w;
  std::shared_ptr<const RadialMetric> h;
  FlowConfig config;
  double max_fairness_ratio = 1.0;  // max over steps of max(g/h, h/g) componentwise
};

inline void check_state(const RadialMetric& g, double t) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g.A[i]) || !std::isfinite(g.B[i])) {
      throw NumericalAbort("NaN in metric at t = " + std::to_string(t) + ", r = " + std::to_string(g.g()[i]));
    }
    if (!(g.A[i] > 0.0) || !(g.B[i] > 0.0)) {
      throw NumericalAbort("metric lost positivity at t = " + std::to_string(t) + ", r = " + std::to_string(g.g()[i]));
    }
  }
}

inline std::pair<std::size_t, std::size_t> active_range(const RadialGrid& grid, std::size_t frozen) {
  const std::size_t lo = grid.mirrored() ? 0 : frozen;
  const std::size_t hi = grid.size() - frozen;
  return {lo, hi};
}

// Running low-order bits of A and B. Per-step increments are a few hundred
// ulp far out, so plain accumulation rounds with a consistent bias that shows
// up in the mass flux; Kahan summation removes it.
struct Compensation {
  std::vector<double> A, B;
};

namespace detail {

inline void kahan_add(double& sum, double& c, double inc) {
  const double y = inc - c;
  const double t = sum + y;
  c = (t - sum) - y;
  sum = t;
}

}  // namespace detail

// One Heun (RK2) step of the h-flow. Frozen boundary nodes keep their values.
inline void h_flow_step(RadialMetric& g, const RadialMetric& h, const MetricDerivs& dh, double dt, RhsForm form,
                        std::size_t frozen, Compensation* comp = nullptr) {
  const auto [lo, hi] = active_range(g.g(), frozen);
  const auto k1 = flow_rhs(g, derivs(g), dh, form);
  RadialMetric mid = g;
  for (std::size_t i = lo; i < hi; ++i) {
    mid.A[i] += dt * k1.A[i];
    mid.B[i] += dt * k1.B[i];
  }
  const auto k2 = flow_rhs(mid, derivs(mid), dh, form);
  if (comp) {
    comp->A.resize(g.size(), 0.0);
    comp->B.resize(g.size(), 0.0);
  }
  for (std::size_t i = lo; i < hi; ++i) {
    const double incA = 0.5 * dt * (k1.A[i] + k2.A[i]), incB = 0.5 * dt * (k1.B[i] + k2.B[i]);
    if (comp) {
      detail::kahan_add(g.A[i], comp->A[i], incA);
      detail::kahan_add(g.B[i], comp->B[i], incB);
    } else {
      g.A[i] += incA;
      g.B[i] += incB;
    }
  }
  g.profile.reset();
  (void)h;
}

// Linearly implicit two-stage Rosenbrock step (ROS2, gamma = 1 + 1/sqrt(2)),
//   (I - gamma dt J) k1 = F(y),  (I - gamma dt J) k2 = F(y + dt k1) - 2 k1,
//   y+ = y + dt (3 k1 + k2) / 2,
// second order and L-stable for any Jacobian approximation J. Unknowns are
// interleaved (A_i, B_i); 4th-order stencils couple nodes i-2..i+2, so J has
// five sub- and super-diagonals and is built from ten colored evaluations.
class RosenbrockStepper {
 public:
  RosenbrockStepper(const RadialMetric& h, const MetricDerivs& dh, RhsForm form, std::size_t frozen)
      : dh_(dh), form_(form), frozen_(frozen) {
    (void)h;
  }

  // Attempts a step of size dt. Returns the scaled local error (accept when
  // <= 1); on acceptance g is advanced in place.
  double attempt(RadialMetric& g, double dt, double tol, Compensation* comp) {
    const std::size_t N = g.size(), M = 2 * N;
    const auto [lo, hi] = active_range(g.g(), frozen_);
    const auto F0 = rate(g, lo, hi);
    jacobian(g, F0, lo, hi);
    // band of I - gamma dt J in LAPACK column-major layout
    const double gam = 1.0 + 1.0 / std::sqrt(2.0);
    std::vector<double> ab(ldab * M, 0.0);
    for (std::size_t j = 0; j < M; ++j) {
      for (long o = -ku; o <= kl; ++o) {
        const long i = static_cast<long>(j) + o;
        if (i < 0 || i >= static_cast<long>(M)) continue;
        const double a = (i == static_cast<long>(j) ? 1.0 : 0.0) - gam * dt * jac_[j * band + (o + ku)];
        ab[j * ldab + (kl + ku + i - static_cast<long>(j))] = a;
      }
    }
    std::vector<lapack_int> piv(M);
    const auto m = static_cast<lapack_int>(M);
    if (LAPACKE_dgbtrf(LAPACK_COL_MAJOR, m, m, kl, ku, ab.data(), ldab, piv.data()) != 0) {
      throw NumericalAbort("singular implicit step matrix");
    }
    auto solve = [&](std::vector<double>& x) {
      if (LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', m, kl, ku, 1, ab.data(), ldab, piv.data(), x.data(), m) != 0) {
        throw NumericalAbort("implicit step solve failed");
      }
    };
    std::vector<double> k1 = F0;
    solve(k1);
    RadialMetric mid = g;
    mid.profile.reset();
    for (std::size_t i = lo; i < hi; ++i) {
      mid.A[i] += dt * k1[2 * i];
      mid.B[i] += dt * k1[2 * i + 1];
    }
    for (std::size_t i = 0; i < N; ++i) {
      if (!(mid.A[i] > 0.0) || !(mid.B[i] > 0.0)) return 1e10;
    }
    auto k2 = rate(mid, lo, hi);
    for (std::size_t j = 0; j < M; ++j) k2[j] -= 2.0 * k1[j];
    solve(k2);
    double err = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      for (int f = 0; f < 2; ++f) {
        const std::size_t j = 2 * i + f;
        const double y = f == 0 ? g.A[i] : g.B[i];
        err = std::max(err, std::abs(0.5 * dt * (k1[j] + k2[j])) / (tol * std::max(1.0, std::abs(y))));
      }
    }
    if (!(err <= 1.0)) return std::isfinite(err) ? err : 1e10;
    if (comp) {
      comp->A.resize(N, 0.0);
      comp->B.resize(N, 0.0);
    }
    for (std::size_t i = lo; i < hi; ++i) {
      const double incA = 0.5 * dt * (3.0 * k1[2 * i] + k2[2 * i]);
      const double incB = 0.5 * dt * (3.0 * k1[2 * i + 1] + k2[2 * i + 1]);
      if (comp) {
        detail::kahan_add(g.A[i], comp->A[i], incA);
        detail::kahan_add(g.B[i], comp->B[i], incB);
      } else {
        g.A[i] += incA;
        g.B[i] += incB;
      }
    }
    g.profile.reset();
    return err;
  }

 private:
  static constexpr lapack_int kl = 5, ku = 5, ldab = 2 * kl + ku + 1;
  static constexpr std::size_t band = kl + ku + 1;

  std::vector<double> rate(const RadialMetric& g, std::size_t lo, std::size_t hi) const {
    const auto r = flow_rhs(g, derivs(g), dh_, form_);
    std::vector<double> out(2 * g.size(), 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
      out[2 * i] = r.A[i];
      out[2 * i + 1] = r.B[i];
    }
    return out;
  }

  // jac_[j * band + (row - j + ku)] = dF_row / dy_j
  void jacobian(const RadialMetric& g, const std::vector<double>& F0, std::size_t lo, std::size_t hi) {
    const std::size_t N = g.size(), M = 2 * N;
    jac_.assign(M * band, 0.0);
    for (std::size_t color = 0; color < 10; ++color) {
      const int f = static_cast<int>(color % 2);
      const std::size_t start = color / 2;
      RadialMetric p = g;
      p.profile.reset();
      std::vector<double> step(N, 0.0);
      for (std::size_t i = start; i < N; i += 5) {
        auto& y = f == 0 ? p.A[i] : p.B[i];
        step[i] = 1e-7 * std::max(1.0, std::abs(y));
        y += step[i];
      }
      const auto F1 = rate(p, lo, hi);
      for (std::size_t i = start; i < N; i += 5) {
        const std::size_t j = 2 * i + f;
        for (long o = -ku; o <= kl; ++o) {
          const long row = static_cast<long>(j) + o;
          if (row < 0 || row >= static_cast<long>(M)) continue;
          // rows of node k only see columns of nodes k-2..k+2
          const long node = row / 2;
          if (std::abs(node - static_cast<long>(i)) > 2) continue;
          const auto ru = static_cast<std::size_t>(row);
          jac_[j * band + (o + ku)] = (F1[ru] - F0[ru]) / step[i];
        }
      }
    }
  }

  const MetricDerivs& dh_;
  RhsForm form_;
  std::size_t frozen_;
  std::vector<double> jac_;
};

inline FlowState h_flow_step(const FlowState& s, double dt, RhsForm form = RhsForm::geometric,
                             std::size_t frozen = 2) {
  FlowState out = s;
  h_flow_step(out.g, *s.h, derivs(*s.h), dt, form, frozen);
  check_state(out.g, s.t + dt);
  out.t = s.t + dt;
  out.W = deturck_vector(out.g, *s.h);
  return out;
}

inline FlowState make_state(double t, const RadialMetric& g, std::shared_ptr<const RadialMetric> h) {
  FlowState s;
  s.t = t;
  s.g = g;
  s.h = std::move(h);
  s.W = deturck_vector(s.g, *s.h);
  const auto jets = difference_jets(s.g, *s.h);
  for (const auto& J : jets) {
    double t1 = 0.0;
    for (int c = 0; c < J.n; ++c)
      for (int a = 0; a < J.n; ++a)
        for (int b = 0; b < J.n; ++b) t1 += J.D(c, a, b) * J.D(c, a, b);
    s.max_grad_eta = std::max(s.max_grad_eta, std::sqrt(t1));
  }
  s.decay = eta_decay_terms(s.g, *s.h, s.g.delta);
  return s;
}

inline double fairness_ratio(const RadialMetric& g, const RadialMetric& h) {
  double q = 1.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (double x : {g.A[i] / h.A[i], g.B[i] / h.B[i]}) q = std::max({q, x, 1.0 / x});
  }
  return q;
}

inline FlowTrajectory evolve(const RadialMetric& metric, const RadialMetric& h, const FlowConfig& config) {
  config.validate();
  if (metric.size() != h.size() || metric.n != h.n) throw ConfigError("metric and background must share grid");
  check_positive(metric);
  const auto fair = is_delta_fair(h, metric, config.fairness);
  if (!fair.fair) {
    throw ConfigError("initial metric is not " + std::to_string(config.fairness) + "-fair to the background (ratio range " +
                      std::to_string(fair.min_ratio) + ".." + std::to_string(fair.max_ratio) + ")");
  }
  auto hp = std::make_shared<const RadialMetric>(h);
  const auto dh = derivs(h);
  FlowTrajectory traj;
  traj.h = hp;
  traj.config = config;
  RadialMetric g = metric;
  double t = 0.0;
  traj.snapshots.push_back(make_state(0.0, g, hp));
  traj.w.t.push_back(0.0);
  traj.w.v.push_back(traj.snapshots.back().W);
  std::size_t steps = 0;
  Compensation comp;
  RosenbrockStepper implicit(h, dh, config.rhs, config.frozen);
  double dt_next = stable_dt(g, config.cfl);

  for (std::size_t k = 1; k <= config.snapshots; ++k) {
    const double target = config.T_final * static_cast<double>(k) / static_cast<double>(config.snapshots);
    while (t < target * (1.0 - 1e-14)) {
      const double remaining = target - t;
      double dt;
      if (config.stepper == Stepper::heun) {
        dt = stable_dt(g, config.cfl);
        if (!(dt > 0.0) || !std::isfinite(dt)) throw NumericalAbort("time step collapsed");
        if (dt >= remaining) dt = remaining;
        else if (dt > 0.5 * remaining) dt = 0.5 * remaining;
        h_flow_step(g, h, dh, dt, config.rhs, config.frozen, &comp);
      } else {
        while (true) {
          dt = std::min(dt_next, remaining);
          if (dt < remaining && dt > 0.5 * remaining) dt = 0.5 * remaining;
          const double err = implicit.attempt(g, dt, config.tolerance, &comp);
          const double factor = std::clamp(0.9 / std::sqrt(std::max(err, 1e-10)), 0.2, 4.0);
          if (err <= 1.0) {
            if (dt < remaining || factor < 1.0) dt_next = dt * factor;
            break;
          }
          dt_next = dt * factor;
          if (dt_next < 1e-14 * std::max(1.0, config.T_final)) throw NumericalAbort("time step collapsed");
        }
      }
      t = (dt == remaining) ? target : t + dt;
      check_state(g, t);
      traj.dt_history.push_back(dt);
      traj.max_fairness_ratio = std::max(traj.max_fairness_ratio, fairness_ratio(g, h));
      if (++steps > config.max_steps) throw NumericalAbort("step limit exceeded");
      if ((steps % config.w_stride == 0 || t == target) && traj.w.t.back() < t) {
        traj.w.t.push_back(t);
        traj.w.v.push_back(deturck_vector(g, h));
      }
    }
    traj.snapshots.push_back(make_state(t, g, hp));
  }
  return traj;
}

// Pointwise residual dR/dt - (Delta R + 2 |Ric|^2 + v R') at snapshot k from
// time-centered differences of snapshots k-1 and k+1. Without the advection
// term v R' the expression is the plain Ricci-flow evolution of R.
inline std::vector<double> scalar_evolution_residual(const FlowTrajectory& traj, std::size_t k,
                                                     bool advection = true) {
  if (k == 0 || k + 1 >= traj.snapshots.size()) throw ConfigError("need snapshots on both sides");
  const auto& prev = traj.snapshots[k - 1].g;
  const auto& cur = traj.snapshots[k].g;
  const auto& next = traj.snapshots[k + 1].g;
  const double dt = traj.snapshots[k + 1].t - traj.snapshots[k - 1].t;
  const auto Rp = scalar_curvature(prev), Rn = scalar_curvature(next);
  const auto d = derivs(cur);
  const auto R = scalar_curvature(cur, d);
  const auto Q = ricci_norm_sq(cur);
  const auto dR = differentiate(cur.g(), R, Parity::even);
  const auto& v = traj.snapshots[k].W;
  std::vector<double> res(cur.size());
  for (std::size_t i = 0; i < cur.size(); ++i) {
    const double r = cur.g()[i];
    const double cC = 1.0 / r + d.dB[i] / (2.0 * d.B[i]);
    const double lap = dR.d2[i] / d.A[i] + dR.d1[i] * ((cur.n - 1) * cC / d.A[i] - d.dA[i] / (2.0 * d.A[i] * d.A[i]));
    double rhs = lap + 2.0 * Q[i];
    if (advection) rhs += v[i] * dR.d1[i];
    res[i] = (Rn[i] - Rp[i]) / dt - rhs;
  }
  return res;
}

}  // namespace rflow
