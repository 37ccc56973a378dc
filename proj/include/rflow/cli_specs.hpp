#pragma once

// `name:key=value,...` strings for the built-in metrics and grids used by the
// command line.

#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rflow/io.hpp"
#include "rflow/metric.hpp"

namespace rflow::cli {

struct Spec {
  std::string name;
  std::map<std::string, std::string> keys;

  double num(const std::string& k, double fallback) const {
    const auto it = keys.find(k);
    return it == keys.end() ? fallback : io::detail::parse_double(it->second, name + "." + k);
  }
  std::size_t count(const std::string& k, std::size_t fallback) const {
    const double v = num(k, static_cast<double>(fallback));
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError(name + "." + k + " must be a positive integer");
    return static_cast<std::size_t>(v);
  }
  std::string str(const std::string& k, const std::string& fallback) const {
    const auto it = keys.find(k);
    return it == keys.end() ? fallback : it->second;
  }
  void allow(const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : keys) {
      if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' for '" + name + "'");
    }
  }
};

// Keys are separated by ',' or ';'. "file:path" keeps the path verbatim.
inline Spec parse_spec(const std::string& text) {
  Spec s;
  const auto colon = text.find(':');
  s.name = text.substr(0, colon);
  if (s.name.empty()) throw ConfigError("empty specification");
  if (colon == std::string::npos) return s;
  const std::string rest = text.substr(colon + 1);
  if (s.name == "file") {
    s.keys["path"] = rest;
    return s;
  }
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    const auto end = rest.find_first_of(",;", pos);
    const std::string item = rest.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    if (!item.empty()) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value in '" + text + "'");
      s.keys[item.substr(0, eq)] = item.substr(eq + 1);
    }
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return s;
}

inline int dimension_of(const Spec& s, int fallback = 3) {
  const double n = s.num("n", fallback);
  if (n != 3 && n != 4 && n != 5) throw ConfigError("dimension must be 3, 4 or 5");
  return static_cast<int>(n);
}

// center:h0=0.01,rmax=2000,n=2048 | throat:m=1,rmax=4000,n=2048 |
// geometric:rmin=1,rmax=4000,n=2048 | uniform:rmax=50,n=512
inline GridPtr make_grid(const Spec& s) {
  if (s.name == "center") {
    s.allow({"h0", "rmax", "n"});
    return share(RadialGrid::center_sinh(s.num("h0", 0.01), s.num("rmax", 2000.0), s.count("n", 2048)));
  }
  if (s.name == "throat") {
    s.allow({"m", "rmax", "n"});
    return share(RadialGrid::throat(0.5 * s.num("m", 1.0), s.num("rmax", 4000.0), s.count("n", 2048)));
  }
  if (s.name == "geometric") {
    s.allow({"rmin", "rmax", "n"});
    return share(RadialGrid::geometric(s.num("rmin", 1.0), s.num("rmax", 4000.0), s.count("n", 2048)));
  }
  if (s.name == "uniform") {
    s.allow({"rmax", "n"});
    return share(RadialGrid::uniform_centered(s.num("rmax", 50.0), s.count("n", 512)));
  }
  throw ConfigError("unknown grid '" + s.name + "' (center, throat, geometric, uniform)");
}

// Default grid per metric: isotropic Schwarzschild on its throat grid, all
// others center-regular.
inline GridPtr default_grid(const Spec& metric, std::size_t nodes = 2048) {
  if (metric.name == "schwarzschild") {
    return share(RadialGrid::throat(0.5 * metric.num("m", 1.0), 4000.0, nodes));
  }
  return share(RadialGrid::center_sinh(0.01, 2000.0, nodes));
}

inline Distortion make_distortion(const Spec& s) {
  s.allow({"amp", "rk", "width", "kinked", "n"});
  Distortion d;
  d.amplitude = s.num("amp", 0.05);
  d.r_k = s.num("rk", 3.0);
  d.width = s.num("width", 1.0);
  d.kinked = s.num("kinked", 1.0) != 0.0;
  if (!(d.amplitude > -1.0 / std::exp(1.0) && d.r_k > 0.0 && d.width > 0.0)) {
    throw ConfigError("distortion needs amp > -1/e, rk > 0, width > 0");
  }
  return d;
}

// flat[:n] | schwarzschild:m[,n] | conformal:a,b[,n] | bump:alpha,beta,width[,n]
// | anisotropic:a,c[,n] | distorted-flat:amp,rk,width,kinked[,n] | file:path
inline RadialMetric make_metric(const Spec& s, GridPtr grid) {
  if (s.name == "file") {
    std::ifstream in(s.str("path", ""));
    if (!in) throw ConfigError("cannot open metric file '" + s.str("path", "") + "'");
    return io::read_metric(in);
  }
  if (!grid) grid = default_grid(s);
  const int n = dimension_of(s);
  if (s.name == "flat") {
    s.allow({"n"});
    return build_flat(n, grid);
  }
  if (s.name == "schwarzschild") {
    s.allow({"m", "n"});
    const double m = s.num("m", 1.0);
    if (!(m > 0.0)) throw ConfigError("schwarzschild mass must be positive");
    return build_schwarzschild_isotropic(m, grid, n);
  }
  if (s.name == "conformal") {
    s.allow({"a", "b", "n"});
    return build_conformal(n, s.num("a", 0.5), s.num("b", 1.0), grid);
  }
  if (s.name == "bump") {
    s.allow({"alpha", "beta", "width", "n"});
    return build_bump(n, s.num("alpha", 0.3), s.num("beta", -0.2), s.num("width", 1.5), grid);
  }
  if (s.name == "anisotropic") {
    s.allow({"a", "c", "n"});
    return build_anisotropic(n, s.num("a", 0.4), s.num("c", 0.3), grid);
  }
  if (s.name == "distorted-flat") return build_distorted_flat(n, make_distortion(s), grid);
  throw ConfigError("unknown metric '" + s.name + "'");
}

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find(',', pos);
    const std::string item = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    if (!item.empty()) v.push_back(io::detail::parse_double(item, "list entry"));
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  if (v.empty()) throw ConfigError("empty list '" + text + "'");
  return v;
}

}  // namespace rflow::cli
