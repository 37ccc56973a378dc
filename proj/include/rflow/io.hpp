#pragma once

// Text formats. Metric files are CSV `r,A,B` after a `# n=... delta=...`
// header; corner files hold the inner piece, a `# corner r0=...` line and the
// outer piece. Reports are key=value lines; series are CSV. Doubles are
// written with %.17g so that runs are reproducible byte for byte.

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rflow/analysis.hpp"
#include "rflow/corner.hpp"
#include "rflow/heat.hpp"

namespace rflow::io {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::map<std::string, std::string> parse_header(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream in(line.substr(1));
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

inline double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + ": '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("cannot parse " + what + ": '" + s + "'");
  return v;
}

struct Rows {
  std::vector<double> r, A, B;
};

// Reads `r,A,B` rows until EOF or a comment line, which is returned in `stop`.
inline Rows read_rows(std::istream& in, std::string* stop) {
  Rows rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (stop) *stop = line;
      return rows;
    }
    if (line.rfind("r,", 0) == 0) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c)) {
      throw ConfigError("metric row needs r,A,B: '" + line + "'");
    }
    rows.r.push_back(parse_double(a, "r"));
    rows.A.push_back(parse_double(b, "A"));
    rows.B.push_back(parse_double(c, "B"));
  }
  if (stop) stop->clear();
  return rows;
}

inline RadialMetric to_metric(Rows rows, int n, double delta, bool center_regular, const std::string& name) {
  RadialMetric m;
  m.grid = share(RadialGrid::from_nodes(std::move(rows.r), center_regular));
  m.n = n;
  m.delta = delta;
  m.name = name;
  m.A = std::move(rows.A);
  m.B = std::move(rows.B);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(m.A[i] > 0.0 && m.B[i] > 0.0)) throw ConfigError("metric file has A or B <= 0 at r = " + num(m.g()[i]));
  }
  return m;
}

inline void write_rows(std::ostream& out, const RadialMetric& m, std::size_t first, std::size_t last) {
  for (std::size_t i = first; i <= last; ++i) out << num(m.g()[i]) << ',' << num(m.A[i]) << ',' << num(m.B[i]) << '\n';
}

inline void write_header(std::ostream& out, const RadialMetric& m) {
  out << "# n=" << m.n << " delta=" << num(m.delta) << " center_regular=" << (m.g().center_regular() ? 1 : 0)
      << " name=" << (m.name.empty() ? "metric" : m.name) << '\n';
  out << "r,A,B\n";
}

struct Header {
  int n = 3;
  double delta = 1.0;
  bool center_regular = false;
  std::string name = "metric";
};

inline Header read_header(std::istream& in) {
  std::string line;
  while (std::getline(in, line) && line.empty()) {
  }
  if (line.empty() || line[0] != '#') throw ConfigError("metric file must start with a '# n=... delta=...' header");
  const auto kv = parse_header(line);
  Header h;
  if (!kv.count("n")) throw ConfigError("metric header lacks n");
  h.n = static_cast<int>(parse_double(kv.at("n"), "n"));
  if (kv.count("delta")) h.delta = parse_double(kv.at("delta"), "delta");
  if (kv.count("center_regular")) h.center_regular = kv.at("center_regular") == "1";
  if (kv.count("name")) h.name = kv.at("name");
  return h;
}

}  // namespace detail

inline void write_metric(std::ostream& out, const RadialMetric& m) {
  detail::write_header(out, m);
  detail::write_rows(out, m, 0, m.size() - 1);
}

inline RadialMetric read_metric(std::istream& in) {
  const auto h = detail::read_header(in);
  std::string stop;
  auto rows = detail::read_rows(in, &stop);
  if (!stop.empty()) throw ConfigError("unexpected comment line in metric file: " + stop);
  return detail::to_metric(std::move(rows), h.n, h.delta, h.center_regular, h.name);
}

inline void write_corner(std::ostream& out, const CornerMetric& cm) {
  detail::write_header(out, cm.metric);
  detail::write_rows(out, cm.metric, 0, cm.i0);
  out << "# corner r0=" << num(cm.r0) << '\n';
  detail::write_rows(out, cm.metric, cm.i0, cm.metric.size() - 1);
}

inline CornerMetric read_corner(std::istream& in) {
  const auto h = detail::read_header(in);
  std::string stop;
  auto inner = detail::read_rows(in, &stop);
  if (stop.rfind("# corner", 0) != 0) throw ConfigError("corner file lacks the '# corner r0=...' separator");
  const auto kv = detail::parse_header(stop);
  auto outer = detail::read_rows(in, &stop);
  if (!stop.empty()) throw ConfigError("unexpected comment line in corner file: " + stop);
  if (inner.r.size() < 3 || outer.r.size() < 3) throw ConfigError("corner pieces need at least three nodes each");
  const double r0 = kv.count("r0") ? detail::parse_double(kv.at("r0"), "r0") : inner.r.back();
  if (std::abs(inner.r.back() - r0) > 1e-12 * std::max(1.0, r0)) throw ConfigError("inner piece must end at r0");
  auto cm = corner_from_pieces(detail::to_metric(std::move(inner), h.n, h.delta, h.center_regular, h.name),
                               detail::to_metric(std::move(outer), h.n, h.delta, false, h.name));
  cm.metric.name = h.name;
  return cm;
}

// key=value lines: the resolved configuration first, then per monitor its
// pass flag, tolerance and measured quantities.
inline void write_report(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& config,
                         const std::vector<MonitorReport>& reports) {
  for (const auto& [k, v] : config) out << "config." << k << '=' << v << '\n';
  bool all = true;
  for (const auto& r : reports) {
    out << r.lemma << ".pass=" << (r.pass ? 1 : 0) << '\n';
    out << r.lemma << ".tolerance=" << num(r.tolerance) << '\n';
    for (const auto& [k, v] : r.measured) out << r.lemma << '.' << k << '=' << num(v) << '\n';
    all = all && r.pass;
  }
  out << "pass=" << (all ? 1 : 0) << '\n';
}

inline void write_monitor_csv(std::ostream& out, const MonitorReport& r) {
  for (std::size_t j = 0; j < r.columns.size(); ++j) out << (j ? "," : "") << r.columns[j];
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << num(row[j]);
    out << '\n';
  }
}

// One row per snapshot and node.
inline void write_trajectory(std::ostream& out, const FlowTrajectory& traj) {
  out << "t,r,A,B,R,W\n";
  for (const auto& s : traj.snapshots) {
    const auto R = scalar_curvature(s.g);
    for (std::size_t i = 0; i < s.g.size(); ++i) {
      out << num(s.t) << ',' << num(s.g.g()[i]) << ',' << num(s.g.A[i]) << ',' << num(s.g.B[i]) << ',' << num(R[i])
          << ',' << num(s.W[i]) << '\n';
    }
  }
}

// t, X, sup_k0, sup_k1, sup_k2 per profile and annulus.
inline void write_heat_decay(std::ostream& out, const std::vector<HeatProfile>& profiles,
                             const std::vector<std::pair<double, double>>& annuli) {
  out << "t,X,sup_k0,sup_k1,sup_k2\n";
  for (const auto& p : profiles) {
    const auto d0 = decay_profile(p, 0, annuli), d1 = decay_profile(p, 1, annuli), d2 = decay_profile(p, 2, annuli);
    for (std::size_t a = 0; a < annuli.size(); ++a) {
      out << num(p.t) << ',' << num(d0[a].X) << ',' << num(d0[a].sup) << ',' << num(d1[a].sup) << ',' << num(d2[a].sup)
          << '\n';
    }
  }
}

}  // namespace rflow::io
