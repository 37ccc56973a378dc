#pragma once

// Oracle equivalence: the radial closed forms for R, |Ric|^2, the mean
// curvature of coordinate spheres, the mass flux and the DeTurck field against
// the Cartesian finite-difference oracles, on metrics that carry a profile.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rflow/analysis.hpp"
#include "rflow/flow.hpp"
#include "rflow/mass.hpp"
#include "rflow/oracle.hpp"

namespace rflow {

struct CorpusEntry {
  std::string label;
  RadialMetric metric;
};

inline std::vector<CorpusEntry> verification_corpus() {
  const auto center = share(RadialGrid::center_sinh(0.01, 2000.0, 2048));
  const auto exterior = share(RadialGrid::geometric(1.0, 4000.0, 2048));
  std::vector<CorpusEntry> c;
  c.push_back({"schwarzschild", build_schwarzschild_isotropic(1.0, exterior)});
  c.push_back({"conformal-n3", build_conformal(3, 0.5, 1.0, center)});
  c.push_back({"conformal-n4", build_conformal(4, 0.8, 1.5, center)});
  c.push_back({"bump-n3", build_bump(3, 0.3, -0.2, 1.5, center)});
  c.push_back({"anisotropic-n5", build_anisotropic(5, 0.4, 0.3, center)});
  return c;
}

namespace detail {

inline double oracle_rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace detail

// Relative error |a - b| / (1 + |b|) per quantity and metric, sampled at
// `samples` nodes (R, |Ric|^2, H), at r in {20, 100} (flux) and at 6 nodes
// for W against the background bump(0.2, 0.1, 1.5).
inline MonitorReport verify_suite(const std::vector<CorpusEntry>& corpus, double tol = 1e-5, std::size_t samples = 23) {
  MonitorReport rep;
  rep.lemma = "oracle_equivalence";
  rep.tolerance = tol;
  rep.columns = {"metric", "R", "ricci_sq", "mean_curvature", "flux", "deturck"};
  for (std::size_t e = 0; e < corpus.size(); ++e) {
    const auto& m = corpus[e].metric;
    if (!m.profile) throw ConfigError("oracle check needs a metric with a closed-form profile: " + corpus[e].label);
    const int n = m.n;
    const auto R = scalar_curvature(m);
    const auto Q = ricci_norm_sq(m);
    const oracle::Evaluator ev(oracle::cartesian(*m.profile, n), n);
    std::array<double, 5> worst{};
    const std::size_t stride = std::max<std::size_t>(1, m.size() / samples);
    for (std::size_t i = 4; i + 4 < m.size(); i += stride) {
      const double r = m.g()[i];
      const auto x = oracle::on_axis(n, r);
      worst[0] = std::max(worst[0], detail::oracle_rel(R[i], ev.scalar_standard(x)));
      worst[1] = std::max(worst[1], detail::oracle_rel(Q[i], ev.ricci_norm_sq(x)));
      worst[2] = std::max(worst[2], detail::oracle_rel(mean_curvature_sphere(m, r), ev.mean_curvature(x)));
    }
    for (double r : {20.0, 100.0}) {
      if (r <= m.g().r_min() || r >= m.g().r_max()) continue;
      worst[3] = std::max(worst[3], detail::oracle_rel(adm_mass_flux(m, r), oracle::flux_quadrature(ev, r)));
    }
    const auto h = build_bump(n, 0.2, 0.1, 1.5, m.grid);
    const oracle::Evaluator eh(oracle::cartesian(*h.profile, n), n);
    const auto dg = derivs(m), dh = derivs(h);
    for (double r : {0.3, 1.0, 1.5, 2.5, 6.0, 20.0}) {
      if (r <= m.g().r_min()) continue;
      const std::size_t i = m.g().nearest_index(r);
      const double ri = m.g()[i];
      const double v = deturck_value(n, ri, node(dg, i), node(dh, i)).first;
      const auto W = oracle::deturck(ev, eh, oracle::on_axis(n, ri));
      worst[4] = std::max(worst[4], detail::oracle_rel(v, W(0) / m.A[i]));
    }
    std::vector<double> row{static_cast<double>(e)};
    for (std::size_t q = 0; q < worst.size(); ++q) {
      row.push_back(worst[q]);
      rep.set(corpus[e].label + "." + rep.columns[q + 1], worst[q]);
      if (!(worst[q] < tol)) rep.pass = false;
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace rflow
