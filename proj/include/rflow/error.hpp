#pragma once

#include <stdexcept>
#include <string>

namespace rflow {

// Bad input or configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown: NaN, loss of positivity, CFL violation (CLI exit code 3).
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rflow
