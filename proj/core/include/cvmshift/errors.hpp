#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cvmshift {

/// Bad user input: CLI flags, config files, table/model mismatches.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric failure while computing: divergence, condition violations,
/// non-finite intermediate values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Euler recursion left the admissible region (|X| > divergence guard
/// or non-finite state). Carries the offending step index.
class SimulationDiverged : public NumericError {
 public:
  SimulationDiverged(std::size_t step, double value)
      : NumericError("simulation diverged at step " + std::to_string(step) +
                     " (state = " + std::to_string(value) + ")"),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A regularity condition required by the model family does not hold
/// numerically (drift sign condition, non-positive Fisher information, ...).
class ConditionError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace cvmshift
