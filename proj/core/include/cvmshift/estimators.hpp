#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cvmshift/invariant_law.hpp"
#include "cvmshift/model.hpp"
#include "cvmshift/simulate.hpp"

namespace cvmshift {

enum class ShiftMethod { mle, mde };

/// Point estimate of the shift parameter.
struct ShiftEstimate {
  double theta_hat = 0.0;
  ShiftMethod method = ShiftMethod::mle;
  bool boundary_hit = false;
  std::vector<std::pair<double, double>> objective_curve;  // (theta, value)
};

/// Optimizer knobs: coarse scan resolution and golden-section bracket tol.
struct OptimOptions {
  std::size_t grid_points = 201;
  double tol = 1e-10;
  bool record_curve = false;
};

enum class CurveKind { lte, edf, kernel };

/// A density or CDF estimate tabulated on a grid.
struct CurveEstimate {
  CurveKind kind = CurveKind::lte;
  std::vector<double> x;
  std::vector<double> values;
};

/// Discretized log-likelihood ratio: left-endpoint Ito sums
///   sum S*(X_k - theta) (X_{k+1} - X_k) - dt/2 sum S*(X_k - theta)^2.
double log_likelihood(const Path& path, const ShiftDriftModel& model,
                      double theta);

/// MLE of the shift: coarse scan over [alpha, beta] followed by
/// golden-section refinement; ties break toward the smaller theta.
ShiftEstimate mle_shift(const Path& path, const ShiftDriftModel& model,
                        const OptimOptions& options = {});

/// Minimum distance estimate: minimizes the L2(dx) distance between the
/// path's EDF and F(. - theta) on the law grid.
ShiftEstimate mde_shift(const Path& path, const ShiftDriftModel& model,
                        const InvariantLaw& law,
                        const OptimOptions& options = {});

/// MDE against an externally supplied CDF curve (must be tabulated on the
/// law grid). Exposed so a perfect-fit curve can be injected in tests.
ShiftEstimate mde_shift_from_curve(const CurveEstimate& edf_curve,
                                   const ShiftDriftModel& model,
                                   const InvariantLaw& law,
                                   const OptimOptions& options = {});

/// The squared-distance objective minimized by the MDE.
double mde_objective(const CurveEstimate& edf_curve, const InvariantLaw& law,
                     double theta);

/// Local-time density estimator on x_grid:
///   (|X_T - x| - |X_0 - x|) / T - (1/T) sum sgn(X_k - x) (X_{k+1} - X_k),
/// with sgn(0) = 0.
CurveEstimate lte_density(const Path& path, std::span<const double> x_grid);

/// Empirical distribution function: time average of 1{X_t < x} over the
/// left endpoints.
CurveEstimate edf(const Path& path, std::span<const double> x_grid);

/// Gaussian-kernel density estimate with the 1/sqrt(T) bandwidth scaling:
///   (1/sqrt(T)) integral K(sqrt(T)(X_t - x)) dt.
CurveEstimate kernel_density(const Path& path, std::span<const double> x_grid);

}  // namespace cvmshift
