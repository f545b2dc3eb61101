#include "cvmshift/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cvmshift/errors.hpp"

namespace cvmshift {

namespace {

void require_path(const Path& path) {
  if (path.values.size() < 2 || !(path.dt > 0.0)) {
    throw std::invalid_argument("path must hold at least two values, dt > 0");
  }
}

ShiftEstimate run_shift_optimizer(const std::function<double(double)>& score,
                                  const ShiftDriftModel& model,
                                  ShiftMethod method,
                                  const OptimOptions& options) {
  const double alpha = model.theta_interval.alpha;
  const double beta = model.theta_interval.beta;
  const auto res = grid_then_golden_max(score, alpha, beta,
                                        options.grid_points, options.tol,
                                        options.record_curve);
  ShiftEstimate est;
  est.theta_hat = res.arg;
  est.method = method;
  const double h_theta =
      (beta - alpha) / static_cast<double>(options.grid_points - 1);
  est.boundary_hit =
      (est.theta_hat - alpha) <= h_theta || (beta - est.theta_hat) <= h_theta;
  if (options.record_curve) {
    est.objective_curve = res.scan;
    if (method == ShiftMethod::mde) {
      for (auto& pt : est.objective_curve) pt.second = -pt.second;
    }
  }
  return est;
}

// Sorted left endpoints paired with prefix sums of the increments; shared
// backbone of the LTE and EDF evaluations.
struct SortedIncrements {
  std::vector<double> x;       // sorted left-endpoint values
  std::vector<double> cum_dx;  // cum_dx[i] = sum of dx for the first i points
  double total_dx = 0.0;

  explicit SortedIncrements(const Path& path) {
    const std::size_t m = path.values.size() - 1;
    std::vector<std::pair<double, double>> pts(m);
    for (std::size_t k = 0; k < m; ++k) {
      pts[k] = {path.values[k], path.values[k + 1] - path.values[k]};
    }
    std::sort(pts.begin(), pts.end());
    x.resize(m);
    cum_dx.resize(m + 1);
    cum_dx[0] = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      x[k] = pts[k].first;
      cum_dx[k + 1] = cum_dx[k] + pts[k].second;
    }
    total_dx = cum_dx[m];
  }

  // sum of dx over points with X_k < q  /  X_k == q.
  std::pair<double, double> split_at(double q) const {
    const auto lo = std::lower_bound(x.begin(), x.end(), q) - x.begin();
    const auto hi = std::upper_bound(x.begin(), x.end(), q) - x.begin();
    const double below = cum_dx[static_cast<std::size_t>(lo)];
    const double at = cum_dx[static_cast<std::size_t>(hi)] - below;
    return {below, at};
  }

  std::size_t count_below(double q) const {
    return static_cast<std::size_t>(
        std::lower_bound(x.begin(), x.end(), q) - x.begin());
  }
};

}  // namespace

double log_likelihood(const Path& path, const ShiftDriftModel& model,
                      double theta) {
  require_path(path);
  const auto& v = path.values;
  const auto& S = model.drift_star;
  double ito = 0.0, quad = 0.0;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    const double s = S(v[k] - theta);
    ito += s * (v[k + 1] - v[k]);
    quad += s * s;
  }
  return ito - 0.5 * path.dt * quad;
}

ShiftEstimate mle_shift(const Path& path, const ShiftDriftModel& model,
                        const OptimOptions& options) {
  require_path(path);
  auto score = [&](double theta) { return log_likelihood(path, model, theta); };
  return run_shift_optimizer(score, model, ShiftMethod::mle, options);
}

double mde_objective(const CurveEstimate& edf_curve, const InvariantLaw& law,
                     double theta) {
  const auto& grid = law.grid();
  if (edf_curve.values.size() != grid.size()) {
    throw std::invalid_argument("EDF curve is not on the law grid");
  }
  std::vector<double> diff2(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = edf_curve.values[i] - law.cdf(grid.node(i), theta);
    diff2[i] = d * d;
  }
  return trapezoid(diff2, grid.h());
}

ShiftEstimate mde_shift_from_curve(const CurveEstimate& edf_curve,
                                   const ShiftDriftModel& model,
                                   const InvariantLaw& law,
                                   const OptimOptions& options) {
  auto score = [&](double theta) {
    return -mde_objective(edf_curve, law, theta);
  };
  return run_shift_optimizer(score, model, ShiftMethod::mde, options);
}

ShiftEstimate mde_shift(const Path& path, const ShiftDriftModel& model,
                        const InvariantLaw& law, const OptimOptions& options) {
  require_path(path);
  const auto nodes = law.grid_nodes();
  const CurveEstimate curve = edf(path, nodes);
  return mde_shift_from_curve(curve, model, law, options);
}

CurveEstimate lte_density(const Path& path, std::span<const double> x_grid) {
  require_path(path);
  const SortedIncrements inc(path);
  const double T = path.duration();
  const double x0 = path.values.front();
  const double xT = path.values.back();

  CurveEstimate out;
  out.kind = CurveKind::lte;
  out.x.assign(x_grid.begin(), x_grid.end());
  out.values.resize(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double q = x_grid[i];
    // sum sgn(X_k - q) dX_k = total - 2*sum_{X_k<q} - sum_{X_k==q}
    const auto [below, at] = inc.split_at(q);
    const double sgn_sum = inc.total_dx - 2.0 * below - at;
    out.values[i] =
        (std::abs(xT - q) - std::abs(x0 - q)) / T - sgn_sum / T;
  }
  return out;
}

CurveEstimate edf(const Path& path, std::span<const double> x_grid) {
  require_path(path);
  const std::size_t m = path.values.size() - 1;
  std::vector<double> sorted(path.values.begin(), path.values.end() - 1);
  std::sort(sorted.begin(), sorted.end());

  CurveEstimate out;
  out.kind = CurveKind::edf;
  out.x.assign(x_grid.begin(), x_grid.end());
  out.values.resize(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const auto below = static_cast<double>(
        std::lower_bound(sorted.begin(), sorted.end(), x_grid[i]) -
        sorted.begin());
    // (count * dt) / T with T = m * dt; the division keeps the boundary
    // values exactly 0 and 1.
    out.values[i] = below / static_cast<double>(m);
  }
  return out;
}

CurveEstimate kernel_density(const Path& path,
                             std::span<const double> x_grid) {
  require_path(path);
  std::vector<double> sorted(path.values.begin(), path.values.end() - 1);
  std::sort(sorted.begin(), sorted.end());

  const double T = path.duration();
  const double sqrt_T = std::sqrt(T);
  // Gaussian kernel support is effectively |u| <= 8.
  const double window = 8.0 / sqrt_T;
  constexpr double inv_sqrt_2pi = 0.3989422804014326779;

  CurveEstimate out;
  out.kind = CurveKind::kernel;
  out.x.assign(x_grid.begin(), x_grid.end());
  out.values.resize(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double q = x_grid[i];
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), q - window);
    const auto hi = std::upper_bound(lo, sorted.end(), q + window);
    double acc = 0.0;
    for (auto it = lo; it != hi; ++it) {
      const double u = sqrt_T * (*it - q);
      acc += std::exp(-0.5 * u * u);
    }
    // (dt / sqrt(T)) * sum K(...) with K the standard normal density.
    out.values[i] = acc * inv_sqrt_2pi * path.dt / sqrt_T;
  }
  return out;
}

}  // namespace cvmshift
