#pragma once

// Exact Cartesian jets of rotationally symmetric 2-tensors
//   T_ij(x) = p(r) delta_ij + q(r) xh_i xh_j,   xh = x / r,
// evaluated at the point x = r e_1, together with Christoffel symbols and
// curvature built from them. Index 0 is radial, indices 1..n-1 tangential.

#include <array>
#include <cmath>

#include "rflow/error.hpp"

namespace rflow::jet {

inline constexpr int kMaxDim = 5;

struct Rank2 {
  std::array<double, kMaxDim * kMaxDim> v{};
  double& operator()(int i, int j) { return v[i * kMaxDim + j]; }
  double operator()(int i, int j) const { return v[i * kMaxDim + j]; }
};
struct Rank3 {
  std::array<double, kMaxDim * kMaxDim * kMaxDim> v{};
  double& operator()(int k, int i, int j) { return v[(k * kMaxDim + i) * kMaxDim + j]; }
  double operator()(int k, int i, int j) const { return v[(k * kMaxDim + i) * kMaxDim + j]; }
};
struct Rank4 {
  std::array<double, kMaxDim * kMaxDim * kMaxDim * kMaxDim> v{};
  double& operator()(int l, int k, int i, int j) { return v[((l * kMaxDim + k) * kMaxDim + i) * kMaxDim + j]; }
  double operator()(int l, int k, int i, int j) const { return v[((l * kMaxDim + k) * kMaxDim + i) * kMaxDim + j]; }
};

// Radial profile values: p, p', p'', q, q', q''.
struct RadialCoeffs {
  double p = 0, dp = 0, ddp = 0;
  double q = 0, dq = 0, ddq = 0;
};

// Coefficients of a metric A dr^2 + B r^2 dOmega^2: p = B, q = A - B.
inline RadialCoeffs metric_coeffs(double A, double dA, double ddA, double B, double dB, double ddB) {
  return {B, dB, ddB, A - B, dA - dB, ddA - ddB};
}

struct TensorJet {
  int n = 3;
  Rank2 T;   // T_ij
  Rank3 D;   // d_k T_ij
  Rank4 DD;  // d_l d_k T_ij
};

inline void check_jet_dim(int n) {
  if (n < 2 || n > kMaxDim) throw ConfigError("tensor jets support dimensions up to 5");
}

inline TensorJet radial_jet(int n, double r, const RadialCoeffs& c) {
  check_jet_dim(n);
  TensorJet J;
  J.n = n;
  auto xh = [](int i) { return i == 0 ? 1.0 : 0.0; };
  auto pi = [](int i, int j) { return (i == j && i != 0) ? 1.0 : 0.0; };
  auto dl = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  const double qr = c.q / r;
  const double dq_r = c.dq / r;
  const double qr2 = c.q / (r * r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) J.T(i, j) = c.p * dl(i, j) + c.q * xh(i) * xh(j);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        J.D(k, i, j) = c.dp * xh(k) * dl(i, j) + c.dq * xh(k) * xh(i) * xh(j) +
                       qr * (pi(k, i) * xh(j) + pi(k, j) * xh(i));
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = c.ddp * xh(l) * xh(k) * dl(i, j) + c.dp * pi(l, k) * dl(i, j) / r;
          v += c.ddq * xh(l) * xh(k) * xh(i) * xh(j);
          v += dq_r * (pi(l, k) * xh(i) * xh(j) + xh(k) * pi(l, i) * xh(j) + xh(k) * xh(i) * pi(l, j) +
                       xh(l) * pi(k, i) * xh(j) + xh(l) * pi(k, j) * xh(i));
          v += qr2 * (-xh(l) * (pi(k, i) * xh(j) + pi(k, j) * xh(i)) - (pi(l, k) * xh(i) + xh(k) * pi(l, i)) * xh(j) -
                      (pi(l, k) * xh(j) + xh(k) * pi(l, j)) * xh(i) + pi(k, i) * pi(l, j) + pi(k, j) * pi(l, i));
          J.DD(l, k, i, j) = v;
        }
  return J;
}

// Christoffel symbols and their first derivatives of a metric jet.
struct Connection {
  int n = 3;
  Rank2 g, ginv;
  Rank3 dginv;  // d_k g^{ij} stored as (k, i, j)
  Rank3 G;      // Gamma^k_ij stored as (k, i, j)
  Rank3 Glow;   // Gamma_{k ij} = g_km Gamma^m_ij
  Rank4 dG;     // d_l Gamma^k_ij stored as (l, k, i, j)
};

// The metric is diagonal at x = r e_1, which keeps the inverse trivial.
inline Connection connection(const TensorJet& J) {
  Connection C;
  const int n = J.n;
  C.n = n;
  C.g = J.T;
  for (int i = 0; i < n; ++i) C.ginv(i, i) = 1.0 / J.T(i, i);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) C.dginv(k, i, j) = -C.ginv(i, i) * J.D(k, i, j) * C.ginv(j, j);
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) C.Glow(m, i, j) = 0.5 * (J.D(i, m, j) + J.D(j, m, i) - J.D(m, i, j));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) C.G(k, i, j) = C.ginv(k, k) * C.Glow(k, i, j);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int m = 0; m < n; ++m) {
            const double dlow = 0.5 * (J.DD(l, i, m, j) + J.DD(l, j, m, i) - J.DD(l, m, i, j));
            s += C.dginv(l, k, m) * C.Glow(m, i, j) + (m == k ? C.ginv(k, k) * dlow : 0.0);
          }
          C.dG(l, k, i, j) = s;
        }
  return C;
}

// Riemann tensor R^a_{bcd} = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb,
// lowered as R_{abcd} = g_ae R^e_bcd. Ricci R_bd = R^a_{bad}.
inline Rank4 riemann_lower(const Connection& C) {
  Rank4 R;
  const int n = C.n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double s = C.dG(c, a, d, b) - C.dG(d, a, c, b);
          for (int e = 0; e < n; ++e) s += C.G(a, c, e) * C.G(e, d, b) - C.G(a, d, e) * C.G(e, c, b);
          R(a, b, c, d) = C.g(a, a) * s;
        }
  return R;
}

inline Rank2 ricci(const Connection& C) {
  const Rank4 R = riemann_lower(C);
  Rank2 Ric;
  const int n = C.n;
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) s += C.ginv(a, a) * R(a, b, a, d);
      Ric(b, d) = s;
    }
  return Ric;
}

}  // namespace rflow::jet
