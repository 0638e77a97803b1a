#pragma once

#include <stdexcept>
#include <string>

namespace gshs {

/// Solver-side failure: divergence, non-convergence, corrupted coefficients.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed experiment configuration or input file.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gshs
