#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace cvmshift {

/// Composite trapezoid rule on a uniform grid with spacing h.
double trapezoid(std::span<const double> values, double h) noexcept;

/// Running trapezoid integral; out[0] = 0, out[k] = integral up to node k.
std::vector<double> cumulative_trapezoid(std::span<const double> values,
                                         double h);

/// Running Simpson integral on a uniform grid (parabolic rule on interval
/// pairs, half-parabola correction on odd nodes). out[0] = 0.
std::vector<double> cumulative_simpson(std::span<const double> values,
                                       double h);

/// Uniform grid [lo, lo + h*(n-1)] with fast index/interpolation helpers.
class UniformGrid {
 public:
  UniformGrid() = default;
  UniformGrid(double lo, double h, std::size_t n) : lo_(lo), h_(h), n_(n) {}

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return lo_ + h_ * static_cast<double>(n_ - 1); }
  double h() const noexcept { return h_; }
  std::size_t size() const noexcept { return n_; }
  double node(std::size_t i) const noexcept {
    return lo_ + h_ * static_cast<double>(i);
  }
  std::vector<double> nodes() const;

  bool contains(double x) const noexcept { return x >= lo() && x <= hi(); }

  /// Linear interpolation of `values` (tabulated on this grid) at x.
  /// Out-of-range x evaluates to `outside`.
  double interpolate(std::span<const double> values, double x,
                     double outside) const noexcept;

  /// As interpolate(), but clamps to the boundary values outside the grid.
  double interpolate_clamped(std::span<const double> values,
                             double x) const noexcept;

 private:
  double lo_ = 0.0;
  double h_ = 1.0;
  std::size_t n_ = 0;
};

/// Golden-section search for the maximum of f on [lo, hi]; returns the
/// abscissa once the bracket is narrower than tol.
double golden_section_max(const std::function<double(double)>& f, double lo,
                          double hi, double tol);

/// Grid scan (ties toward the smaller abscissa) followed by golden-section
/// refinement in the winning bracket. Returns {argmax, max}.
struct GridRefineResult {
  double arg;
  double value;
  std::size_t grid_index;
  std::vector<std::pair<double, double>> scan;  // filled when record_scan
};
GridRefineResult grid_then_golden_max(const std::function<double(double)>& f,
                                      double lo, double hi,
                                      std::size_t grid_points, double tol,
                                      bool record_scan = false);

}  // namespace cvmshift
