#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cvmshift/model.hpp"
#include "cvmshift/numeric.hpp"
#include "cvmshift/simulate.hpp"

namespace cvmshift {

/// Tabulated invariant law of dX = S*(X) dt + dW: density f, CDF F,
/// normalization G, Fisher information I and an exponential tail witness.
/// Immutable after construction; safe to share across threads.
class InvariantLaw {
 public:
  /// Quadrature build on [-L, L] with spacing h. The inner drift integral
  /// uses cumulative Simpson, the normalization and CDF use trapezoid, and
  /// the exponent is accumulated in the log domain.
  InvariantLaw(const ShiftDriftModel& model, double L, double h);

  /// Chooses L = A + max(20/gamma, 10) from the drift's tail estimate and
  /// h = 1e-3 * L.
  explicit InvariantLaw(const ShiftDriftModel& model);

  /// Law of an arbitrary drift (used for alternative-hypothesis paths).
  /// Fisher information is only available when a derivative is supplied.
  InvariantLaw(std::string name, const RealFn& drift, const RealFn* deriv,
               double L, double h);

  const std::string& model_ref() const noexcept { return model_ref_; }
  const UniformGrid& grid() const noexcept { return grid_; }
  std::vector<double> grid_nodes() const { return grid_.nodes(); }
  const std::vector<double>& f_vals() const noexcept { return f_; }
  const std::vector<double>& F_vals() const noexcept { return F_; }
  const std::vector<double>& log_density_unnorm() const noexcept {
    return log_unnorm_;
  }
  double G() const noexcept { return G_; }
  double fisher() const noexcept { return fisher_; }
  double tail_A() const noexcept { return tail_A_; }
  double tail_gamma() const noexcept { return tail_gamma_; }
  double tail_C() const noexcept { return tail_C_; }

  /// f(x - theta); zero beyond the grid (tail bound keeps this honest).
  double density(double x, double theta = 0.0) const noexcept;

  /// F(x - theta); clamps to 0/1 beyond the grid.
  double cdf(double x, double theta = 0.0) const noexcept;

  /// Inverse CDF by bisection on the tabulated F plus linear interpolation.
  /// Requires p in (1e-9, 1 - 1e-9).
  double inverse_cdf(double p) const;

  /// M(y, x) = 2 f(x) (1{y > x} - F(y)) / f(y). Requires |y| <= L and
  /// f(y) above the representable floor.
  double kernel_M(double y, double x) const;

  /// H(z, x) = 2 (F(z ^ x) - F(z) F(x)) / f(z), same domain rules.
  double kernel_H(double z, double x) const;

  /// S*'(x) of the generating drift; throws when built without derivative.
  double drift_deriv(double x) const;

  /// f'(x) = 2 S*(x) f(x).
  double density_deriv(double x) const noexcept;

  /// Largest grid subinterval where f >= rel_cut * max f. Kernel
  /// y-integrations are restricted to it; the remainder is controlled by
  /// the tail bound.
  std::pair<double, double> effective_support(double rel_cut = 1e-12) const;

 private:
  void build(const RealFn& drift, const RealFn* deriv, double L, double h);

  std::string model_ref_;
  UniformGrid grid_;
  std::vector<double> log_unnorm_;
  std::vector<double> f_;
  std::vector<double> F_;
  double G_ = 0.0;
  double fisher_ = 0.0;
  double tail_A_ = 0.0;
  double tail_gamma_ = 0.0;
  double tail_C_ = 0.0;
  RealFn drift_;
  RealFn deriv_;  // may be empty for raw-drift laws
};

/// Free-function spellings.
InvariantLaw build_law(const ShiftDriftModel& model, double L, double h);
InvariantLaw build_law(const ShiftDriftModel& model);

}  // namespace cvmshift
