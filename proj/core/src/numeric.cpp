#include "cvmshift/numeric.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cvmshift {

double trapezoid(std::span<const double> values, double h) noexcept {
  if (values.size() < 2) return 0.0;
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
  return sum * h;
}

std::vector<double> cumulative_trapezoid(std::span<const double> values,
                                         double h) {
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t i = 1; i < values.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * h * (values[i - 1] + values[i]);
  }
  return out;
}

std::vector<double> cumulative_simpson(std::span<const double> values,
                                       double h) {
  const std::size_t n = values.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  out[1] = 0.5 * h * (values[0] + values[1]);  // no pair yet
  for (std::size_t k = 2; k < n; ++k) {
    if (k % 2 == 0) {
      out[k] = out[k - 2] +
               h / 3.0 * (values[k - 2] + 4.0 * values[k - 1] + values[k]);
    } else {
      // Integral over the last interval from the parabola through the
      // last three nodes.
      out[k] = out[k - 1] + h / 12.0 *
                                (5.0 * values[k] + 8.0 * values[k - 1] -
                                 values[k - 2]);
    }
  }
  return out;
}

std::vector<double> UniformGrid::nodes() const {
  std::vector<double> xs(n_);
  for (std::size_t i = 0; i < n_; ++i) xs[i] = node(i);
  return xs;
}

double UniformGrid::interpolate(std::span<const double> values, double x,
                                double outside) const noexcept {
  if (n_ == 0 || x < lo() || x > hi()) return outside;
  const double t = (x - lo_) / h_;
  auto i = static_cast<std::size_t>(t);
  if (i >= n_ - 1) return values[n_ - 1];
  const double w = t - static_cast<double>(i);
  return values[i] + w * (values[i + 1] - values[i]);
}

double UniformGrid::interpolate_clamped(std::span<const double> values,
                                        double x) const noexcept {
  if (n_ == 0) return 0.0;
  if (x <= lo()) return values.front();
  if (x >= hi()) return values.back();
  return interpolate(values, x, 0.0);
}

double golden_section_max(const std::function<double(double)>& f, double lo,
                          double hi, double tol) {
  constexpr double invphi = 0.6180339887498948482;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

GridRefineResult grid_then_golden_max(const std::function<double(double)>& f,
                                      double lo, double hi,
                                      std::size_t grid_points, double tol,
                                      bool record_scan) {
  if (grid_points < 3) throw std::invalid_argument("grid_points < 3");
  if (!(hi > lo)) throw std::invalid_argument("empty interval");
  GridRefineResult res;
  const double h = (hi - lo) / static_cast<double>(grid_points - 1);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  if (record_scan) res.scan.reserve(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = lo + h * static_cast<double>(i);
    const double v = f(x);
    if (record_scan) res.scan.emplace_back(x, v);
    if (v > best) {  // strict: ties keep the smaller abscissa
      best = v;
      best_i = i;
    }
  }
  const double bl = (best_i == 0) ? lo : lo + h * static_cast<double>(best_i - 1);
  const double br = (best_i + 1 >= grid_points)
                        ? hi
                        : lo + h * static_cast<double>(best_i + 1);
  res.arg = golden_section_max(f, bl, br, tol);
  res.value = f(res.arg);
  res.grid_index = best_i;
  // The refined point can only improve on the scan winner; keep whichever
  // evaluates higher to stay exact on flat objectives.
  if (best > res.value) {
    res.arg = lo + h * static_cast<double>(best_i);
    res.value = best;
  }
  return res;
}

}  // namespace cvmshift
