#pragma once

// Whole-run experiments: mass constancy along the flow, its grid convergence,
// lower semicontinuity of the mass through mollified corners, and the
// zero-mass pipeline on a flat metric in kinked coordinates.

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "rflow/analysis.hpp"
#include "rflow/corner.hpp"
#include "rflow/diffeo.hpp"
#include "rflow/mass.hpp"

namespace rflow {

struct NamedRun {
  std::string label;
  FlowTrajectory traj;
};

struct ExperimentResult {
  std::vector<MonitorReport> reports;
  std::vector<NamedRun> runs;
  bool pass() const {
    for (const auto& r : reports) {
      if (!r.pass) return false;
    }
    return true;
  }
};

// Runs fn(0..count-1) on up to `jobs` threads. The first exception is rethrown.
inline void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline const std::vector<double>& default_mass_radii() {
  static const std::vector<double> r{50.0, 100.0, 200.0};
  return r;
}

// ---------------------------------------------------------------- mass constancy

// m(t) from the flux ladder at every snapshot, against `reference` (m(0) when
// NaN): relative error < tol, absolute error < 1e-6 when the reference is 0.
// The drift d m_r / dt at r = 100 is recorded next to the envelope
// gradflux(100) + |m_100 - m|, the boundary term plus the r^{-lambda} rest.
inline ExperimentResult mass_constancy_experiment(const RadialMetric& metric, const RadialMetric& h,
                                                  const FlowConfig& config,
                                                  const std::vector<double>& radii = default_mass_radii(),
                                                  double reference = std::numeric_limits<double>::quiet_NaN(),
                                                  double tol = 1e-2) {
  ExperimentResult out;
  out.runs.push_back({metric.name, evolve(metric, h, config)});
  const auto& traj = out.runs.back().traj;
  MonitorReport rep;
  rep.lemma = "mass_constancy";
  rep.tolerance = tol;
  rep.columns = {"t", "mass", "rel_error"};
  for (std::size_t j = 0; j < radii.size(); ++j) rep.columns.push_back("mass_flux_r" + std::to_string(j + 1));
  std::vector<double> m, m100;
  for (const auto& s : traj.snapshots) {
    const auto mr = adm_mass(s.g, radii);
    m.push_back(mr.mass);
    m100.push_back(adm_mass_flux(s.g, 100.0));
    if (std::isnan(reference)) reference = mr.mass;
    const double err = std::abs(mr.mass - reference);
    const double rel = reference != 0.0 ? err / std::abs(reference) : err;
    if (reference != 0.0 ? rel >= tol : err >= 1e-6) rep.pass = false;
    std::vector<double> row{s.t, mr.mass, rel};
    row.insert(row.end(), mr.flux.begin(), mr.flux.end());
    rep.rows.push_back(std::move(row));
  }
  double drift = 0.0, grad = 0.0, rest = 0.0, max_rel = 0.0;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    max_rel = std::max(max_rel, rep.rows[k][2]);
    rest = std::max(rest, std::abs(m100[k] - m[k]));
    if (k > 0) {
      drift = std::max(drift, std::abs(m100[k] - m100[k - 1]) / (traj.snapshots[k].t - traj.snapshots[k - 1].t));
      const auto R = scalar_curvature(traj.snapshots[k].g);
      grad = std::max(grad, boundary_gradient_flux(traj.snapshots[k].g, first_derivative(traj.snapshots[k].g.g(), R, Parity::even), 100.0));
    }
  }
  if (drift > grad + rest) rep.pass = false;
  rep.set("reference", reference);
  rep.set("max_rel_error", max_rel);
  rep.set("drift_r100", drift);
  rep.set("envelope_r100", grad + rest);
  rep.set("steps", static_cast<double>(traj.dt_history.size()));
  out.reports.push_back(std::move(rep));
  return out;
}

// Schwarzschild of mass `mass` on throat grids of the given sizes (ascending).
// Grid error e_N = max_t |m_N(t) - m_finest(t)| for all but the finest; the
// observed order log2(e_N / e_2N) must be >= 1 on every rung.
inline MonitorReport mass_refinement_study(const std::vector<std::size_t>& sizes, FlowConfig config,
                                           double mass = 1.0, std::size_t jobs = 1,
                                           const std::vector<double>& radii = default_mass_radii()) {
  if (sizes.size() < 3) throw ConfigError("refinement study needs at least three grid sizes");
  for (std::size_t j = 1; j < sizes.size(); ++j) {
    if (sizes[j] != 2 * sizes[j - 1]) throw ConfigError("refinement study needs successively doubled grids");
  }
  std::vector<std::vector<double>> m(sizes.size());
  parallel_for(sizes.size(), jobs, [&](std::size_t j) {
    const auto g = build_schwarzschild_isotropic(mass, share(RadialGrid::throat(0.5 * mass, 4000.0, sizes[j])));
    const auto traj = evolve(g, blended_background(g, config.fairness), config);
    for (const auto& s : traj.snapshots) m[j].push_back(adm_mass(s.g, radii).mass);
  });
  MonitorReport rep;
  rep.lemma = "mass_refinement";
  rep.tolerance = 1.0;
  rep.columns = {"nodes", "grid_error", "order"};
  const auto& ref = m.back();
  std::vector<double> err;
  for (std::size_t j = 0; j + 1 < sizes.size(); ++j) {
    double e = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) e = std::max(e, std::abs(m[j][k] - ref[k]));
    err.push_back(e);
  }
  for (std::size_t j = 0; j < err.size(); ++j) {
    const double order = j + 1 < err.size() ? std::log2(err[j] / err[j + 1]) : std::numeric_limits<double>::quiet_NaN();
    if (j + 1 < err.size() && !(order >= 1.0)) rep.pass = false;
    rep.rows.push_back({static_cast<double>(sizes[j]), err[j], order});
  }
  rep.set("final_mass_finest", ref.back());
  rep.set("final_error_vs_16pi", std::abs(ref.back() - 16.0 * M_PI * mass));
  return rep;
}

// ---------------------------------------------------------------- mass liminf

struct LiminfConfig {
  std::vector<double> radii = default_mass_radii();
  double tol = 1e-2;         // relative, mass statements
  double R_tol = 1e-4;       // R(g(T)) >= -R_tol
  double equal_tol = 1e-10;  // pre-flow masses across the ladder, relative
  double background_sigma = 0.1;
  std::size_t jobs = 1;
};

// For each eps: mollify the corner, evolve against one background (the
// blended background of the sigma = background_sigma mollification), record
// m(g_eps(t)). Checks: pre-flow masses agree across the ladder; every
// m(g_eps(t)) is within tol of m(g_hat); the limit mass, extrapolated linearly
// in eps from the two smallest rungs at t = T, is at most the ladder minimum
// plus tol; and min R(g_eps(T)) >= -R_tol on every rung.
inline ExperimentResult mass_liminf_experiment(const CornerMetric& cm, std::vector<double> eps_ladder,
                                               const FlowConfig& config, const LiminfConfig& lc = {}) {
  if (eps_ladder.empty()) throw ConfigError("eps ladder is empty");
  std::sort(eps_ladder.begin(), eps_ladder.end(), std::greater<>());
  if (!corner_condition(cm).satisfied) throw ConfigError("corner violates the mean-curvature condition");
  const auto h = blended_background(detail::mollify_with(cm, lc.background_sigma), config.fairness);
  const double m_hat = adm_mass(cm.metric, lc.radii).mass;
  const std::size_t L = eps_ladder.size();
  ExperimentResult out;
  out.runs.resize(L);
  std::vector<double> pre(L), minR(L);
  std::vector<std::vector<double>> m(L);
  std::vector<SmoothingReport> cert(L);
  parallel_for(L, lc.jobs, [&](std::size_t j) {
    const auto mo = mollify(cm, eps_ladder[j]);
    cert[j] = mo.report;
    pre[j] = adm_mass(mo.metric, lc.radii).mass;
    auto traj = evolve(mo.metric, h, config);
    for (const auto& s : traj.snapshots) m[j].push_back(adm_mass(s.g, lc.radii).mass);
    const auto R = scalar_curvature(traj.snapshots.back().g);
    minR[j] = *std::min_element(R.begin(), R.end());
    out.runs[j] = {"eps=" + std::to_string(eps_ladder[j]), std::move(traj)};
  });
  MonitorReport rep;
  rep.lemma = "mass_liminf";
  rep.tolerance = lc.tol;
  rep.columns = {"t"};
  for (double e : eps_ladder) rep.columns.push_back("mass_eps" + std::to_string(e));
  const std::size_t K = m[0].size();
  double worst = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> row{out.runs[0].traj.snapshots[k].t};
    for (std::size_t j = 0; j < L; ++j) {
      row.push_back(m[j][k]);
      worst = std::max(worst, std::abs(m[j][k] - m_hat) / std::abs(m_hat));
    }
    rep.rows.push_back(std::move(row));
  }
  double pre_spread = 0.0, ladder_min = std::numeric_limits<double>::infinity(), R_min = 0.0;
  for (std::size_t j = 0; j < L; ++j) {
    pre_spread = std::max(pre_spread, std::abs(pre[j] - pre[0]) / std::abs(pre[0]));
    ladder_min = std::min(ladder_min, pre[j]);
    R_min = std::min(R_min, minR[j]);
    rep.set("premass_eps" + std::to_string(eps_ladder[j]), pre[j]);
    rep.set("certificate_eps" + std::to_string(eps_ladder[j]), cert[j].satisfied ? 1.0 : 0.0);
    rep.set("minR_T_eps" + std::to_string(eps_ladder[j]), minR[j]);
  }
  double limit = m.back().back();
  if (L >= 2) {
    const double e1 = eps_ladder[L - 1], e2 = eps_ladder[L - 2];
    const double a = m[L - 1].back(), b = m[L - 2].back();
    limit = a - (b - a) * e1 / (e2 - e1);
  }
  const bool equal_ok = pre_spread <= lc.equal_tol;
  const bool near_ok = worst < lc.tol;
  const bool limit_ok = limit <= ladder_min + lc.tol * std::abs(ladder_min);
  const bool R_ok = R_min >= -lc.R_tol;
  rep.pass = equal_ok && near_ok && limit_ok && R_ok;
  rep.set("mass_ghat", m_hat);
  rep.set("premass_spread", pre_spread);
  rep.set("max_rel_dev_from_ghat", worst);
  rep.set("limit_mass_T", limit);
  rep.set("ladder_min", ladder_min);
  rep.set("min_R_T", R_min);
  rep.set("R_tol", lc.R_tol);
  out.reports.push_back(std::move(rep));
  return out;
}

// ---------------------------------------------------------------- zero mass

struct ZeroMassConfig {
  std::vector<double> radii = default_mass_radii();
  double mass_tol = 1e-3;      // |m(g_hat)|
  double R_tol = 1e-4;         // sup |R(g(T))|
  double roundtrip_tol = 1e-2; // C^0 of g_hat vs phi_0^* g(T)
  double map_tol = 1e-2;       // C^0 of phi_0 vs Phi
  double compare_r_max = 50.0; // C^0 errors are taken over r <= compare_r_max
};

inline double c0_distance(const RadialMetric& a, const RadialMetric& b, double r_max) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size() && a.g()[i] <= r_max; ++i) {
    e = std::max({e, std::abs(a.A[i] - b.A[i]), std::abs(a.B[i] - b.B[i])});
  }
  return e;
}

// g_hat = Phi^*(flat) for the Lipschitz radial map Phi, evolved against flat h.
// Checks m(g_hat) = 0, g(T) flat, g_hat = phi_0^* g(T) with phi_0 from the
// extracted diffeomorphism, and phi_0 = Phi up to the radial reparametrization
// that writes g(T) as a pullback of flat.
inline ExperimentResult zero_mass_experiment(const Distortion& Phi, const FlowConfig& config, GridPtr grid = nullptr,
                                             int n = 3, const ZeroMassConfig& zc = {}) {
  if (!grid) grid = share(RadialGrid::center_sinh(0.01, 2000.0, 2048));
  const auto g0 = build_distorted_flat(n, Phi, grid);
  const auto h = build_flat(n, grid);
  ExperimentResult out;
  out.runs.push_back({g0.name, evolve(g0, h, config)});
  const auto& traj = out.runs.back().traj;
  const auto diffeo = extract_diffeomorphism(traj);
  const auto& gT = traj.snapshots.back().g;
  MonitorReport rep;
  rep.lemma = "zero_mass";
  rep.tolerance = zc.roundtrip_tol;
  rep.columns = {"t", "mass", "supR", "roundtrip_c0"};
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto& s = traj.snapshots[k];
    const auto R = scalar_curvature(s.g);
    double supR = 0.0;
    for (double x : R) supR = std::max(supR, std::abs(x));
    const double rt = c0_distance(pullback(gT, diffeo.phi_at(k)), s.g, zc.compare_r_max);
    rep.rows.push_back({s.t, adm_mass(s.g, zc.radii).mass, supR, rt});
  }
  const double m_hat = rep.rows.front()[1];
  const double supR_T = rep.rows.back()[2];
  const double roundtrip = rep.rows.front()[3];
  // g(T) = psi^* flat with psi(y) = y sqrt(B_T(y)), so psi o phi_0 = Phi
  double map_err = 0.0;
  const auto& phi0 = diffeo.phi[0];
  for (std::size_t i = 0; i < grid->size() && (*grid)[i] <= zc.compare_r_max; ++i) {
    const double y = phi0[i];
    const double psi = y * std::sqrt(detail::metric_sample(gT, gT.B, y));
    map_err = std::max(map_err, std::abs(psi - Phi((*grid)[i])));
  }
  rep.pass = std::abs(m_hat) <= zc.mass_tol && supR_T < zc.R_tol && roundtrip < zc.roundtrip_tol && map_err < zc.map_tol;
  rep.set("mass_ghat", m_hat);
  rep.set("supR_T", supR_T);
  rep.set("roundtrip_c0", roundtrip);
  rep.set("map_c0", map_err);
  rep.set("mass_tol", zc.mass_tol);
  rep.set("R_tol", zc.R_tol);
  out.reports.push_back(std::move(rep));
  return out;
}

}  // namespace rflow
