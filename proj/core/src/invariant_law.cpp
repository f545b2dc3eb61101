#include "cvmshift/invariant_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cvmshift/errors.hpp"

namespace cvmshift {

namespace {

constexpr double kDensityFloor = 1e-300;

double auto_truncation(const ShiftDriftModel& model) {
  const auto env = check_drift_envelope(model.drift_star);
  if (!env.es_ok || !env.tail.ok) {
    throw ConditionError("model '" + model.name +
                         "' fails ES/A0 on the probe grid; no invariant law");
  }
  return env.tail.A + std::max(20.0 / env.tail.gamma, 10.0);
}

}  // namespace

InvariantLaw::InvariantLaw(const ShiftDriftModel& model, double L, double h)
    : model_ref_(model.name), drift_(model.drift_star),
      deriv_(model.drift_star_deriv) {
  build(model.drift_star, &model.drift_star_deriv, L, h);
}

InvariantLaw::InvariantLaw(const ShiftDriftModel& model)
    : model_ref_(model.name), drift_(model.drift_star),
      deriv_(model.drift_star_deriv) {
  const double L = auto_truncation(model);
  build(model.drift_star, &model.drift_star_deriv, L, 1e-3 * L);
}

InvariantLaw::InvariantLaw(std::string name, const RealFn& drift,
                           const RealFn* deriv, double L, double h)
    : model_ref_(std::move(name)), drift_(drift) {
  if (deriv != nullptr) deriv_ = *deriv;
  build(drift, deriv, L, h);
}

void InvariantLaw::build(const RealFn& drift, const RealFn* deriv, double L,
                         double h) {
  if (!(L > 0.0) || !(h > 0.0) || h >= L) {
    throw std::invalid_argument("invariant law: need 0 < h < L");
  }
  // Symmetric grid with 0 as a node.
  const auto half = static_cast<std::size_t>(std::ceil(L / h));
  const std::size_t n = 2 * half + 1;
  const double step = L / static_cast<double>(half);
  grid_ = UniformGrid(-L, step, n);

  std::vector<double> drift_vals(n);
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = grid_.node(i);
    drift_vals[i] = drift(xs[i]);
    if (!std::isfinite(drift_vals[i])) {
      throw NumericError("drift not finite at x = " + std::to_string(xs[i]));
    }
  }

  // log f up to normalization: 2 * integral_0^x S*(y) dy.
  const auto cum = cumulative_simpson(drift_vals, step);
  const double at0 = cum[half];
  log_unnorm_.resize(n);
  double lmax = -std::numeric_limits<double>::infinity();
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    log_unnorm_[i] = 2.0 * (cum[i] - at0);
    if (log_unnorm_[i] > lmax) {
      lmax = log_unnorm_[i];
      argmax = i;
    }
  }
  // A density whose exponent peaks at the truncation boundary is not
  // integrable on the line: the drift violates A0.
  if (argmax == 0 || argmax == n - 1) {
    throw ConditionError(
        "unnormalized log-density peaks at the truncation boundary; "
        "the drift violates A0");
  }

  f_.resize(n);
  for (std::size_t i = 0; i < n; ++i) f_[i] = std::exp(log_unnorm_[i] - lmax);
  const double scaled_mass = trapezoid(f_, step);
  if (!(scaled_mass > 0.0) || !std::isfinite(scaled_mass)) {
    throw NumericError("invariant density mass is not positive/finite");
  }
  G_ = scaled_mass * std::exp(lmax);
  for (auto& v : f_) v /= scaled_mass;

  auto Fcum = cumulative_trapezoid(f_, step);
  F_ = std::move(Fcum);

  if (deriv != nullptr) {
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (*deriv)(xs[i]);
      integrand[i] = d * d * f_[i];
    }
    fisher_ = trapezoid(integrand, step);
    if (!(fisher_ > 1e-12)) {
      throw ConditionError("Fisher information is not positive (A2 fails)");
    }
  } else {
    fisher_ = std::numeric_limits<double>::quiet_NaN();
  }

  // Tail witness re-estimated on this grid; C is the smallest constant
  // making f(x) <= C exp(-2 gamma |x|) hold at every grid node beyond A.
  const auto tail = detail::estimate_tail(xs, drift_vals);
  if (!tail.ok) {
    throw ConditionError("no exponential tail witness on the law grid");
  }
  tail_A_ = tail.A;
  tail_gamma_ = tail.gamma;
  double C = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(xs[i]) > tail_A_) {
      C = std::max(C, f_[i] * std::exp(2.0 * tail_gamma_ * std::abs(xs[i])));
    }
  }
  tail_C_ = C * (1.0 + 1e-12);
}

double InvariantLaw::density(double x, double theta) const noexcept {
  return grid_.interpolate(f_, x - theta, 0.0);
}

double InvariantLaw::cdf(double x, double theta) const noexcept {
  const double u = x - theta;
  if (u <= grid_.lo()) return 0.0;
  if (u >= grid_.hi()) return 1.0;
  return grid_.interpolate(F_, u, 0.0);
}

double InvariantLaw::inverse_cdf(double p) const {
  if (!(p > 1e-9 && p < 1.0 - 1e-9)) {
    throw std::invalid_argument("inverse_cdf: p outside (1e-9, 1 - 1e-9)");
  }
  const auto it = std::lower_bound(F_.begin(), F_.end(), p);
  if (it == F_.begin()) return grid_.lo();
  if (it == F_.end()) return grid_.hi();
  const auto j = static_cast<std::size_t>(it - F_.begin());
  const double F_hi = F_[j], F_lo = F_[j - 1];
  const double x_lo = grid_.node(j - 1);
  if (!(F_hi > F_lo)) return x_lo;
  return x_lo + (p - F_lo) / (F_hi - F_lo) * grid_.h();
}

double InvariantLaw::kernel_M(double y, double x) const {
  if (!grid_.contains(y)) {
    throw std::domain_error("kernel_M: y outside the law grid");
  }
  const double fy = density(y);
  if (fy < kDensityFloor) {
    throw NumericError(
        "kernel_M: f(y) below the representable floor; restrict y to the "
        "effective support");
  }
  const double indicator = y > x ? 1.0 : 0.0;
  return 2.0 * density(x) * (indicator - cdf(y)) / fy;
}

double InvariantLaw::kernel_H(double z, double x) const {
  if (!grid_.contains(z)) {
    throw std::domain_error("kernel_H: z outside the law grid");
  }
  const double fz = density(z);
  if (fz < kDensityFloor) {
    throw NumericError(
        "kernel_H: f(z) below the representable floor; restrict z to the "
        "effective support");
  }
  return 2.0 * (cdf(std::min(z, x)) - cdf(z) * cdf(x)) / fz;
}

double InvariantLaw::drift_deriv(double x) const {
  if (!deriv_) {
    throw std::logic_error(
        "law built from a raw drift: no derivative available");
  }
  return deriv_(x);
}

double InvariantLaw::density_deriv(double x) const noexcept {
  const double fx = density(x);
  return fx == 0.0 ? 0.0 : 2.0 * drift_(x) * fx;
}

std::pair<double, double> InvariantLaw::effective_support(
    double rel_cut) const {
  const double fmax = *std::max_element(f_.begin(), f_.end());
  const double cut = rel_cut * fmax;
  std::size_t lo = 0, hi = f_.size() - 1;
  while (lo < hi && f_[lo] < cut) ++lo;
  while (hi > lo && f_[hi] < cut) --hi;
  return {grid_.node(lo), grid_.node(hi)};
}

InvariantLaw build_law(const ShiftDriftModel& model, double L, double h) {
  return InvariantLaw(model, L, h);
}

InvariantLaw build_law(const ShiftDriftModel& model) {
  return InvariantLaw(model);
}

}  // namespace cvmshift
