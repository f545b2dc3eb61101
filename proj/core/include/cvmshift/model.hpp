#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace cvmshift {

using RealFn = std::function<double(double)>;

/// Open parameter interval (alpha, beta) for the shift; must straddle 0.
struct ThetaInterval {
  double alpha;
  double beta;
};

/// A shift-drift family: under the null hypothesis the observed drift is
/// S(x) = drift_star(x - theta) for some theta in theta_interval.
struct ShiftDriftModel {
  std::string name;
  RealFn drift_star;        // S*(x), the drift at theta = 0
  RealFn drift_star_deriv;  // S*'(x)
  ThetaInterval theta_interval{-5.0, 5.0};
  std::map<std::string, double> params;
};

/// Build one of the registered families:
///   "ou"           S*(x) = -rate*x            params: rate (default 1)
///   "cubic"        S*(x) = -x^3               params: none
///   "tanh-damped"  S*(x) = -a*tanh(x) - b*x   params: a (1), b (0.1)
/// Unknown names or parameters raise ConfigError. The interval can be
/// overridden via params "alpha"/"beta".
ShiftDriftModel make_model(const std::string& name,
                           const std::map<std::string, double>& params = {});

/// Names of the registered families.
std::vector<std::string> model_names();

/// Central-difference probe of drift_star_deriv against drift_star on
/// [-probe_half, probe_half]; true when the relative disagreement stays
/// below rel_tol everywhere.
bool derivative_consistent(const ShiftDriftModel& model,
                           double probe_half = 10.0, std::size_t points = 201,
                           double fd_step = 1e-5, double rel_tol = 1e-4);

/// Throws ConfigError unless alpha < 0 < beta and the callables are set;
/// throws ConditionError if the derivative probe fails.
void validate_model(const ShiftDriftModel& model);

}  // namespace cvmshift
