#pragma once

#include <stdexcept>
#include <string>

namespace axsq {

/// Base for failures of a numerical procedure on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Covariance too ill-conditioned to invert.
class DegenerateStateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Sensitivity never drops to half its peak value.
class UnboundedBandwidthError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Quadrature did not reach the requested tolerance.
class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double achieved)
      : NumericalError(what), achieved_tolerance(achieved) {}
  double achieved_tolerance;
};

/// Optimizer could not certify its result (e.g. objective not unimodal).
class OptimizationError : public NumericalError {
 public:
  OptimizationError(const std::string& what, std::string grid_dump)
      : NumericalError(what), grid(std::move(grid_dump)) {}
  std::string grid;
};

/// Configuration rejected at the boundary; message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace axsq
