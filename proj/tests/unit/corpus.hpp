#pragma once

#include "rflow/metric.hpp"

namespace rflow::testing {

inline GridPtr center_grid(std::size_t n = 2048, double r_max = 2000.0) {
  return share(RadialGrid::center_sinh(0.01, r_max, n));
}

inline GridPtr exterior_grid(std::size_t n = 2048, double r_min = 1.0, double r_max = 4000.0) {
  return share(RadialGrid::geometric(r_min, r_max, n));
}

// Geometric grid about the Schwarzschild minimal sphere r = m/2.
inline GridPtr throat_grid(std::size_t n = 2048, double mass = 1.0, double r_max = 4000.0) {
  return share(RadialGrid::throat(0.5 * mass, r_max, n));
}

}  // namespace rflow::testing
