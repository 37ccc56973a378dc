#pragma once

// Command-line front end. Every subcommand writes a key=value report (with the
// resolved configuration) and CSV series to the output directory and returns
// 0 when all monitors pass, 1 on a monitor failure, 2 on a configuration error
// and 3 on a numerical abort.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "rflow/cli_specs.hpp"
#include "rflow/experiments.hpp"
#include "rflow/heat.hpp"
#include "rflow/io.hpp"
#include "rflow/verify.hpp"

namespace rflow::cli {

inline constexpr const char* kOutputEnv = "RFLOW_OUTPUT_DIR";

struct FlowOptions {
  double T = 0.01;
  std::size_t snapshots = 10;
  double cfl = 0.2;
  double fairness = 1.1;
  std::string stepper = "heun";
  std::string rhs = "geometric";
  double tolerance = 1e-7;

  void add(CLI::App* app) {
    app->add_option("--T", T, "final time");
    app->add_option("--snapshots", snapshots, "snapshot intervals");
    app->add_option("--cfl", cfl, "explicit step as a fraction of the stable step");
    app->add_option("--fairness", fairness, "fairness bound between g(0) and the background");
    app->add_option("--stepper", stepper, "heun | rosenbrock")->check(CLI::IsMember({"heun", "rosenbrock"}));
    app->add_option("--rhs", rhs, "geometric | eta")->check(CLI::IsMember({"geometric", "eta"}));
    app->add_option("--tolerance", tolerance, "local error tolerance of the rosenbrock stepper");
  }
  FlowConfig config() const {
    FlowConfig c;
    c.T_final = T;
    c.snapshots = snapshots;
    c.cfl = cfl;
    c.fairness = fairness;
    c.stepper = stepper == "rosenbrock" ? Stepper::rosenbrock : Stepper::heun;
    c.rhs = rhs == "eta" ? RhsForm::eta_equation : RhsForm::geometric;
    c.tolerance = tolerance;
    c.validate();
    return c;
  }
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    CLI::App app{"Radial Ricci-DeTurck flow experiments on asymptotically flat metrics"};
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "structured config file (TOML/INI); flags win over the file");
    const char* env = std::getenv(kOutputEnv);
    out_dir_ = env && *env ? env : "rflow-out";
    app.add_option("--out", out_dir_, std::string("output directory (default from ") + kOutputEnv + ")");
    app.add_option("--jobs", jobs_, "concurrent ladder runs")->check(CLI::PositiveNumber);
    app.require_subcommand(1);
    app.fallthrough();

    add_mass(app);
    add_flow(app);
    add_corner(app);
    add_mass_constancy(app);
    add_mass_liminf(app);
    add_zero_mass(app);
    add_heat(app);
    add_verify(app);

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out_, err_);
      return code == 0 ? 0 : 2;
    }
    try {
      std::filesystem::create_directories(out_dir_);
      for (auto* sub : app.get_subcommands()) {
        resolved_.clear();
        collect(&app, "");
        collect(sub, sub->get_name() + ".");
        return action_() ? 0 : 1;
      }
      return 2;
    } catch (const ConfigError& e) {
      err_ << "config error: " << e.what() << '\n';
      return 2;
    } catch (const std::filesystem::filesystem_error& e) {
      err_ << "config error: " << e.what() << '\n';
      return 2;
    } catch (const NumericalAbort& e) {
      err_ << "numerical abort: " << e.what() << '\n';
      return 3;
    } catch (const std::exception& e) {
      err_ << "numerical abort: " << e.what() << '\n';
      return 3;
    }
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  std::string out_dir_;
  std::size_t jobs_ = 1;
  std::function<bool()> action_;
  std::vector<std::pair<std::string, std::string>> resolved_;

  // option values as parsed, or their defaults
  void collect(const CLI::App* app, const std::string& prefix) {
    for (const auto* opt : app->get_options()) {
      const std::string name = opt->get_single_name();
      if (name.empty() || name == "help" || name == "config" || name == "out") continue;
      std::string v;
      if (opt->count() > 0) {
        for (const auto& r : opt->results()) v += (v.empty() ? "" : ",") + r;
      } else {
        v = opt->get_default_str();
      }
      resolved_.emplace_back(prefix + name, v);
    }
  }

  std::filesystem::path path(const std::string& file) const { return std::filesystem::path(out_dir_) / file; }

  std::ofstream open(const std::string& file) const {
    std::ofstream f(path(file));
    if (!f) throw ConfigError("cannot write " + path(file).string());
    return f;
  }

  bool finish(const std::string& name, const std::vector<MonitorReport>& reports) {
    {
      auto f = open(name + "_report.txt");
      io::write_report(f, resolved_, reports);
    }
    for (const auto& r : reports) {
      if (r.columns.empty()) continue;
      auto f = open(name + "_" + r.lemma + ".csv");
      io::write_monitor_csv(f, r);
    }
    bool all = true;
    for (const auto& r : reports) {
      out_ << r.lemma << ": " << (r.pass ? "pass" : "FAIL") << '\n';
      all = all && r.pass;
    }
    return all;
  }

  void write_trajectory(const std::string& file, const FlowTrajectory& traj) const {
    auto f = open(file);
    io::write_trajectory(f, traj);
  }

  RadialMetric background(const std::string& spec, const RadialMetric& g, double fairness) const {
    if (spec == "blended") return blended_background(g, fairness);
    if (spec == "flat") return build_flat(g.n, g.grid);
    auto h = make_metric(parse_spec(spec), g.grid);
    if (h.size() != g.size()) throw ConfigError("background file must share the metric's grid");
    return h;
  }

  static GridPtr grid_or_null(const std::string& spec) { return spec.empty() ? nullptr : make_grid(parse_spec(spec)); }

  // ------------------------------------------------------------ mass
  struct MassArgs {
    std::string metric, grid, radii = "50,100,200";
  } mass_;
  void add_mass(CLI::App& app) {
    auto* s = app.add_subcommand("mass", "extrapolated ADM mass from the flux ladder");
    s->add_option("--metric", mass_.metric, "metric spec")->required();
    s->add_option("--grid", mass_.grid, "grid spec");
    s->add_option("--radii", mass_.radii, "flux radii");
    s->callback([this] {
      action_ = [this] {
        const auto g = make_metric(parse_spec(mass_.metric), grid_or_null(mass_.grid));
        const auto rep = adm_mass(g, parse_list(mass_.radii));
        MonitorReport m;
        m.lemma = "mass";
        m.tolerance = 0.0;
        m.pass = rep.converged;
        m.set("mass", rep.mass);
        m.set("mass_standard", standard_mass(g.n, rep.mass));
        m.set("lambda_fit", rep.lambda_fit);
        m.set("error_estimate", rep.error_estimate);
        m.set("monotone", rep.monotone ? 1.0 : 0.0);
        m.columns = {"r", "flux"};
        for (std::size_t j = 0; j < rep.radii.size(); ++j) m.rows.push_back({rep.radii[j], rep.flux[j]});
        out_ << "mass=" << io::num(rep.mass) << '\n';
        for (const auto& w : rep.warnings) err_ << "warning: " << w << '\n';
        return finish("mass", {m});
      };
    });
  }

  // ------------------------------------------------------------ flow
  struct FlowArgs {
    std::string metric, grid, background = "blended", flux_radii = "50,100,200", tail_radii = "10,20,40,80";
    double K = -1.0;
    bool trajectory = true;
    FlowOptions flow;
  } flow_;
  void add_flow(CLI::App& app) {
    auto* s = app.add_subcommand("flow", "evolve one metric and run the flow monitors");
    s->add_option("--metric", flow_.metric, "metric spec")->required();
    s->add_option("--grid", flow_.grid, "grid spec");
    s->add_option("--background", flow_.background, "blended | flat | metric spec");
    s->add_option("--flux-radii", flow_.flux_radii, "three radii for the flux columns and gradient monitor");
    s->add_option("--tail-radii", flow_.tail_radii, "radii for the L1 tail monitor");
    s->add_option("--K", flow_.K, "lower curvature bound; negative means measured from g(0)");
    s->add_option("--write-trajectory", flow_.trajectory, "write the trajectory CSV");
    flow_.flow.add(s);
    s->callback([this] {
      action_ = [this] {
        const auto c = flow_.flow.config();
        const auto g = make_metric(parse_spec(flow_.metric), grid_or_null(flow_.grid));
        const auto traj = evolve(g, background(flow_.background, g, c.fairness), c);
        const auto flux = parse_list(flow_.flux_radii);
        const auto tails = parse_list(flow_.tail_radii);
        std::vector<MonitorReport> reps{rneg_monitor(traj, flow_.K), l1_tail_monitor(traj, tails),
                                        boundary_gradient_monitor(traj, flux), decay_monitor(traj)};
        if (flow_.trajectory) write_trajectory("flow_trajectory.csv", traj);
        {
          auto f = open("flow_monitors.csv");
          io::write_monitor_csv(f, monitor_stream(traj, flux, tails.front()));
        }
        return finish("flow", reps);
      };
    });
  }

  // ------------------------------------------------------------ corner
  struct CornerArgs {
    std::string base = "schwarzschild:m=1", eps = "1e-2", write, read;
    double r0 = 4.0, strength = 0.1, r_max = 2000.0, K = 10.0;
  } corner_;

  CornerMetric build_corner(const std::string& base, double r0, double s, double sigma_min, double r_max,
                            const std::string& read = "") const {
    if (!read.empty()) {
      std::ifstream in(read);
      if (!in) throw ConfigError("cannot open corner file '" + read + "'");
      return io::read_corner(in);
    }
    const auto spec = parse_spec(base);
    const auto b = make_metric(spec, spec.name == "schwarzschild"
                                         ? share(RadialGrid::geometric(0.5 * spec.num("m", 1.0), 2.0 * r_max, 256))
                                         : share(RadialGrid::center_sinh(0.01, 2.0 * r_max, 256)));
    const auto grid = share(RadialGrid::collar(r0, std::min(sigma_min, 0.1) / 40.0, 0.06, r_max));
    return corner_example(b, r0, s, grid);
  }

  void add_corner(CLI::App& app) {
    auto* s = app.add_subcommand("corner", "corner metric, its mean-curvature condition and the smoothing ladder");
    s->add_option("--base", corner_.base, "conformally flat base metric spec");
    s->add_option("--r0", corner_.r0, "corner radius");
    s->add_option("--strength", corner_.strength, "kink strength s (s >= 0 satisfies the condition)");
    s->add_option("--eps", corner_.eps, "epsilon ladder");
    s->add_option("--rmax", corner_.r_max, "outer radius of the grid");
    s->add_option("--K", corner_.K, "curvature lower bound target");
    s->add_option("--write", corner_.write, "write the corner file to this path");
    s->add_option("--corner-file", corner_.read, "read the corner from a file instead of building it");
    s->callback([this] {
      action_ = [this] {
        auto eps = parse_list(corner_.eps);
        const double smallest = *std::min_element(eps.begin(), eps.end());
        const auto cm = build_corner(corner_.base, corner_.r0, corner_.strength, smallest, corner_.r_max, corner_.read);
        if (!corner_.write.empty()) {
          std::ofstream f(corner_.write);
          if (!f) throw ConfigError("cannot write " + corner_.write);
          io::write_corner(f, cm);
        }
        const auto cond = corner_condition(cm);
        MonitorReport c;
        c.lemma = "corner_condition";
        c.pass = cond.satisfied;
        c.set("H_minus", cond.H_minus);
        c.set("H_plus", cond.H_plus);
        if (std::isfinite(cm.interior_flux)) c.set("interior_flux", cm.interior_flux);
        c.set("nodes", static_cast<double>(cm.metric.size()));
        MonitorReport m;
        m.lemma = "smoothing";
        m.columns = {"eps", "sigma", "neg_part", "neg_part_masked", "K_measured", "sandwich_min", "sandwich_max",
                     "support_deviation", "satisfied"};
        for (double e : eps) {
          const auto r = mollify(cm, e, corner_.K).report;
          m.rows.push_back({e, r.sigma, r.neg_part, r.neg_part_masked, r.K_measured, r.sandwich_min, r.sandwich_max,
                            r.support_deviation, r.satisfied ? 1.0 : 0.0});
          m.pass = m.pass && r.satisfied;
        }
        m.tolerance = corner_.K;
        return finish("corner", {c, m});
      };
    });
  }

  // ------------------------------------------------------------ mass-constancy
  struct ConstancyArgs {
    std::string metric = "schwarzschild:m=1", grid, background = "blended", radii = "50,100,200", refine;
    double reference = std::numeric_limits<double>::quiet_NaN(), tol = 1e-2;
    bool trajectory = false;
    FlowOptions flow;
  } constancy_;
  void add_mass_constancy(CLI::App& app) {
    auto* s = app.add_subcommand("mass-constancy", "mass along the flow and its grid convergence");
    s->add_option("--metric", constancy_.metric, "metric spec");
    s->add_option("--grid", constancy_.grid, "grid spec");
    s->add_option("--background", constancy_.background, "blended | flat | metric spec");
    s->add_option("--radii", constancy_.radii, "flux radii");
    s->add_option("--reference", constancy_.reference, "reference mass (default m(0))");
    s->add_option("--tol", constancy_.tol, "relative tolerance");
    s->add_option("--refine", constancy_.refine, "doubling throat-grid sizes for a Schwarzschild refinement study");
    s->add_option("--write-trajectory", constancy_.trajectory, "write the trajectory CSV");
    constancy_.flow.add(s);
    s->callback([this] {
      action_ = [this] {
        const auto c = constancy_.flow.config();
        const auto spec = parse_spec(constancy_.metric);
        const auto g = make_metric(spec, grid_or_null(constancy_.grid));
        auto res = mass_constancy_experiment(g, background(constancy_.background, g, c.fairness), c,
                                             parse_list(constancy_.radii), constancy_.reference, constancy_.tol);
        if (!constancy_.refine.empty()) {
          if (spec.name != "schwarzschild") throw ConfigError("--refine needs a schwarzschild metric");
          std::vector<std::size_t> sizes;
          for (double v : parse_list(constancy_.refine)) sizes.push_back(static_cast<std::size_t>(v));
          res.reports.push_back(mass_refinement_study(sizes, c, spec.num("m", 1.0), jobs_, parse_list(constancy_.radii)));
        }
        if (constancy_.trajectory) write_trajectory("mass_constancy_trajectory.csv", res.runs[0].traj);
        return finish("mass_constancy", res.reports);
      };
    });
  }

  // ------------------------------------------------------------ mass-liminf
  struct LiminfArgs {
    std::string base = "schwarzschild:m=1", eps = "1e-1,1e-2,1e-3";
    double r0 = 4.0, strength = 0.1, r_max = 2000.0, tol = 1e-2, R_tol = 1e-4;
    FlowOptions flow{.stepper = "rosenbrock"};
  } liminf_;
  void add_mass_liminf(CLI::App& app) {
    auto* s = app.add_subcommand("mass-liminf", "mass of flowed mollified corners across an epsilon ladder");
    s->add_option("--base", liminf_.base, "conformally flat base metric spec");
    s->add_option("--r0", liminf_.r0, "corner radius");
    s->add_option("--strength", liminf_.strength, "kink strength s");
    s->add_option("--eps", liminf_.eps, "epsilon ladder");
    s->add_option("--rmax", liminf_.r_max, "outer radius of the grid");
    s->add_option("--tol", liminf_.tol, "relative mass tolerance");
    s->add_option("--R-tol", liminf_.R_tol, "allowed negative R at T");
    liminf_.flow.add(s);
    s->callback([this] {
      action_ = [this] {
        const auto c = liminf_.flow.config();
        const auto eps = parse_list(liminf_.eps);
        const auto cm = build_corner(liminf_.base, liminf_.r0, liminf_.strength,
                                     *std::min_element(eps.begin(), eps.end()), liminf_.r_max);
        LiminfConfig lc;
        lc.tol = liminf_.tol;
        lc.R_tol = liminf_.R_tol;
        lc.jobs = jobs_;
        auto res = mass_liminf_experiment(cm, eps, c, lc);
        for (const auto& run : res.runs) {
          for (auto rep : {rneg_monitor(run.traj), decay_monitor(run.traj)}) {
            rep.lemma += "_" + run.label.substr(run.label.find('=') + 1);
            res.reports.push_back(std::move(rep));
          }
        }
        return finish("mass_liminf", res.reports);
      };
    });
  }

  // ------------------------------------------------------------ zero-mass
  struct ZeroArgs {
    std::string kink = "amp=0.05,rk=3,width=1", grid;
    int n = 3;
    FlowOptions flow{.fairness = 1.2};
  } zero_;
  void add_zero_mass(CLI::App& app) {
    auto* s = app.add_subcommand("zero-mass", "flat metric in kinked coordinates: flow, extraction, round trip");
    s->add_option("--kink", zero_.kink, "distortion keys amp, rk, width, kinked");
    s->add_option("--grid", zero_.grid, "grid spec");
    s->add_option("--n", zero_.n, "dimension")->check(CLI::IsMember({3, 4, 5}));
    zero_.flow.add(s);
    s->callback([this] {
      action_ = [this] {
        const auto d = make_distortion(parse_spec("kink:" + zero_.kink));
        auto res = zero_mass_experiment(d, zero_.flow.config(), grid_or_null(zero_.grid), zero_.n);
        return finish("zero_mass", res.reports);
      };
    });
  }

  // ------------------------------------------------------------ heat-demo
  struct HeatArgs {
    double x_max = 200.0, dx = 0.05, x_lo = 20.0, floor = 0.05, ceiling = 1.1;
    std::string times = "0,0.25,0.5,0.75,1";
  } heat_;
  void add_heat(CLI::App& app) {
    auto* s = app.add_subcommand("heat-demo", "1-D heat equation: decay x^-2 is not improved");
    s->add_option("--xmax", heat_.x_max, "half-width of the domain");
    s->add_option("--dx", heat_.dx, "grid spacing");
    s->add_option("--times", heat_.times, "output times");
    s->add_option("--x-lo", heat_.x_lo, "inner edge of the first annulus");
    s->add_option("--floor", heat_.floor, "lower bound for sup x^2 |f|");
    s->add_option("--ceiling", heat_.ceiling, "upper bound for sup x^2 |f|");
    s->callback([this] {
      action_ = [this] {
        const auto p0 = heat_profile(decay_initial, heat_.x_max, heat_.dx);
        const auto annuli = dyadic_annuli(heat_.x_max, heat_.x_lo);
        if (annuli.empty()) throw ConfigError("no annulus between x-lo and xmax/4");
        std::vector<HeatProfile> profiles;
        MonitorReport band;
        band.lemma = "decay_band";
        band.tolerance = heat_.floor;
        for (double t : parse_list(heat_.times)) {
          profiles.push_back(heat_evolve(p0, t));
          for (const auto& row : decay_profile(profiles.back(), 0, annuli)) {
            if (row.sup < heat_.floor || row.sup > heat_.ceiling) band.pass = false;
          }
        }
        {
          auto f = open("heat_decay.csv");
          io::write_heat_decay(f, profiles, annuli);
        }
        band.set("floor", heat_.floor);
        band.set("ceiling", heat_.ceiling);
        MonitorReport conv;
        conv.lemma = "convergence";
        conv.columns = {"dx", "error_vs_dx_over_4"};
        auto at = [&](double dx) { return heat_evolve(heat_profile(decay_initial, heat_.x_max, dx), 0.5); };
        const auto ref = at(0.25 * heat_.dx);
        const double e1 = max_difference_on(at(heat_.dx), ref), e2 = max_difference_on(at(0.5 * heat_.dx), ref);
        conv.rows = {{heat_.dx, e1}, {0.5 * heat_.dx, e2}};
        const double order = observed_order(e1, e2);
        conv.set("ratio", e1 / e2);
        conv.set("order", order);
        conv.tolerance = 0.2;
        conv.pass = std::abs(order - 2.0) < conv.tolerance;
        return finish("heat", {band, conv});
      };
    });
  }

  // ------------------------------------------------------------ verify
  struct VerifyArgs {
    std::vector<std::string> metrics;
    std::string grid;
    double tol = 1e-5;
  } verify_;
  void add_verify(CLI::App& app) {
    auto* s = app.add_subcommand("verify", "closed forms against the Cartesian finite-difference oracles");
    s->add_option("--metric", verify_.metrics, "metric specs (default: the built-in corpus)");
    s->add_option("--grid", verify_.grid, "grid spec");
    s->add_option("--tol", verify_.tol, "relative tolerance");
    s->callback([this] {
      action_ = [this] {
        std::vector<CorpusEntry> corpus;
        if (verify_.metrics.empty()) corpus = verification_corpus();
        for (const auto& m : verify_.metrics) corpus.push_back({m, make_metric(parse_spec(m), grid_or_null(verify_.grid))});
        return finish("verify", {verify_suite(corpus, verify_.tol)});
      };
    });
  }
};

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return Runner(out, err).run(argc, argv);
}

}  // namespace rflow::cli
