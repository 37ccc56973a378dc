#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace rflow {

struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss-Legendre nodes and weights on [a, b] by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0) {
  GaussRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.x[i] = mid - half * z;
    rule.x[n - 1 - i] = mid + half * z;
    rule.w[i] = rule.w[n - 1 - i] = half * w;
  }
  return rule;
}

}  // namespace rflow
