#include "cvmshift/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "cvmshift/errors.hpp"
#include "cvmshift/invariant_law.hpp"
#include "cvmshift/rng.hpp"

namespace cvmshift {

namespace {

// Noise stream ids within a path seed.
constexpr std::uint64_t kStreamIncrements = 0;
constexpr std::uint64_t kStreamInit = 1;

std::size_t step_count(double T, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(T >= 10.0 * dt)) {
    throw std::invalid_argument("T must be at least 10*dt");
  }
  return static_cast<std::size_t>(std::llround(T / dt));
}

double stationary_x0(const InvariantLaw& law, double shift,
                     std::uint64_t seed) {
  const CounterRng rng{seed, kStreamInit};
  // Clamp into inverse_cdf's admissible range; the excluded mass is ~1e-9.
  const double u = std::clamp(rng.uniform(0), 1e-9, 1.0 - 1e-9);
  return shift + law.inverse_cdf(u);
}

}  // namespace

Path euler_path(const RealFn& drift, double x0, double T, double dt,
                const std::function<double(std::uint64_t)>& noise) {
  const std::size_t n_steps = step_count(T, dt);
  Path path;
  path.dt = dt;
  path.values.resize(n_steps + 1);
  double x = x0;
  path.values[0] = x;
  for (std::size_t k = 0; k < n_steps; ++k) {
    x += drift(x) * dt + noise(k);
    if (!std::isfinite(x) || std::abs(x) > kDivergenceGuard) {
      throw SimulationDiverged(k + 1, x);
    }
    path.values[k + 1] = x;
  }
  return path;
}

Path simulate_path(const ShiftDriftModel& model, double theta0, double T,
                   double dt, std::uint64_t seed, const InitRule& init,
                   const InvariantLaw* law) {
  const auto& iv = model.theta_interval;
  if (!(theta0 >= iv.alpha && theta0 <= iv.beta)) {
    throw std::domain_error("theta0 outside the parameter interval");
  }
  std::unique_ptr<InvariantLaw> owned;
  double x0 = init.x0;
  if (init.kind == InitRule::Kind::stationary) {
    if (law == nullptr) {
      owned = std::make_unique<InvariantLaw>(model);
      law = owned.get();
    }
    x0 = stationary_x0(*law, theta0, seed);
  }
  const double sqrt_dt = std::sqrt(dt);
  const CounterRng rng{seed, kStreamIncrements};
  const auto& drift_star = model.drift_star;
  auto drift = [&drift_star, theta0](double x) {
    return drift_star(x - theta0);
  };
  Path path = euler_path(
      drift, x0, T, dt,
      [&rng, sqrt_dt](std::uint64_t k) { return sqrt_dt * rng.normal(k); });
  path.theta_true = theta0;
  path.seed = seed;
  return path;
}

Path alternative_path(const RealFn& drift, double T, double dt,
                      std::uint64_t seed, const InitRule& init,
                      const InvariantLaw* law) {
  std::unique_ptr<InvariantLaw> owned;
  double x0 = init.x0;
  if (init.kind == InitRule::Kind::stationary) {
    if (law == nullptr) {
      const auto envelope = check_drift_envelope(drift);
      if (!envelope.es_ok || !envelope.tail.ok) {
        throw ConditionError(
            "alternative drift fails ES/A0 on the probe grid");
      }
      const double L =
          envelope.tail.A + std::max(20.0 / envelope.tail.gamma, 10.0);
      owned = std::make_unique<InvariantLaw>("alternative", drift, nullptr, L,
                                             1e-3 * L);
      law = owned.get();
    }
    x0 = stationary_x0(*law, 0.0, seed);
  }
  const double sqrt_dt = std::sqrt(dt);
  const CounterRng rng{seed, kStreamIncrements};
  Path path = euler_path(
      drift, x0, T, dt,
      [&rng, sqrt_dt](std::uint64_t k) { return sqrt_dt * rng.normal(k); });
  path.seed = seed;
  return path;
}

DriftEnvelope check_drift_envelope(const RealFn& drift,
                                   const ProbeGrid& probe) {
  if (!(probe.half_width >= 10.0)) {
    throw std::invalid_argument("probe grid must cover [-L, L] with L >= 10");
  }
  if (probe.points < 11) throw std::invalid_argument("probe grid too coarse");

  DriftEnvelope env;
  const double L = probe.half_width;
  const std::size_t n = probe.points;
  const double h = 2.0 * L / static_cast<double>(n - 1);

  // ES: witness C = max over the grid of x S(x) / (1 + x^2), floored at a
  // token positive value (the condition only asks for existence of C > 0).
  bool finite = true;
  double C = 0.0;
  std::vector<double> xs(n), Ss(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = -L + h * static_cast<double>(i);
    Ss[i] = drift(xs[i]);
    if (!std::isfinite(Ss[i])) finite = false;
    C = std::max(C, xs[i] * Ss[i] / (1.0 + xs[i] * xs[i]));
  }
  env.es_ok = finite;
  env.es_constant = std::max(C, 1e-12);
  if (finite) env.tail = detail::estimate_tail(xs, Ss);
  return env;
}

namespace detail {

// For candidate A the margin is m(A) = min over grid |x| in (A, L] of
// -sgn(x) S(x); a pair is feasible when m(A) > 0, with gamma = m(A)/2.
// Among feasible pairs keep the one minimizing the induced truncation
// length A + max(20/gamma, 10): the literal smallest feasible A drives
// gamma -> 0 on fine grids, which would blow up every downstream grid.
TailEstimate estimate_tail(std::span<const double> xs,
                           std::span<const double> drift_vals) {
  TailEstimate tail;
  std::vector<std::pair<double, double>> pts;  // (|x|, -sgn(x) S(x))
  pts.reserve(xs.size());
  double L = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] == 0.0) continue;
    const double sgn = xs[i] > 0.0 ? 1.0 : -1.0;
    pts.emplace_back(std::abs(xs[i]), -sgn * drift_vals[i]);
    L = std::max(L, std::abs(xs[i]));
  }
  std::sort(pts.begin(), pts.end());
  const std::size_t m = pts.size();
  std::vector<double> suffix_min(m + 1,
                                 std::numeric_limits<double>::infinity());
  for (std::size_t i = m; i-- > 0;) {
    suffix_min[i] = std::min(suffix_min[i + 1], pts[i].second);
  }
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double A = (i == 0) ? 0.0 : pts[i - 1].first;
    if (A > 0.5 * L) break;
    const double mg = suffix_min[i];
    if (!(mg > 0.0)) continue;
    const double gamma = 0.5 * mg;
    const double cost = A + std::max(20.0 / gamma, 10.0);
    if (cost < best_cost) {
      best_cost = cost;
      tail.ok = true;
      tail.A = A;
      tail.gamma = gamma;
    }
  }
  return tail;
}

}  // namespace detail

ConditionReport check_conditions(const ShiftDriftModel& model,
                                 const ProbeGrid& probe) {
  ConditionReport report;
  report.probe = probe;
  report.envelope = check_drift_envelope(model.drift_star, probe);
  if (!report.envelope.es_ok || !report.envelope.tail.ok) return report;

  // Lightweight invariant-law quadrature on the probe grid itself; enough
  // for the sign of I and the separation infimum.
  const double L = probe.half_width;
  const std::size_t n = probe.points | 1;  // odd, so 0 is a node
  const double h = 2.0 * L / static_cast<double>(n - 1);
  std::vector<double> drift_vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    drift_vals[i] = model.drift_star(-L + h * static_cast<double>(i));
  }
  const auto cum = cumulative_simpson(drift_vals, h);
  const double at0 = cum[(n - 1) / 2];
  double lmax = -std::numeric_limits<double>::infinity();
  std::vector<double> logf(n);
  for (std::size_t i = 0; i < n; ++i) {
    logf[i] = 2.0 * (cum[i] - at0);
    lmax = std::max(lmax, logf[i]);
  }
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = std::exp(logf[i] - lmax);
  const double mass = trapezoid(f, h);
  for (auto& v : f) v /= mass;

  std::vector<double> integrand(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = model.drift_star_deriv(-L + h * static_cast<double>(i));
    integrand[i] = d * d * f[i];
  }
  report.fisher = trapezoid(integrand, h);
  report.fisher_positive = report.fisher > 1e-8;

  // A2 separation: inf over |tau| > nu (tau scanned out to the interval
  // width) of E0 (S*(xi) - S*(xi + tau))^2.
  const double tau_max =
      std::max(model.theta_interval.beta - model.theta_interval.alpha, 1.0);
  double sep = std::numeric_limits<double>::infinity();
  const std::size_t tau_steps = 64;
  for (std::size_t t = 0; t < tau_steps; ++t) {
    const double mag = probe.nu + (tau_max - probe.nu) *
                                      static_cast<double>(t) /
                                      static_cast<double>(tau_steps - 1);
    for (const double tau : {mag, -mag}) {
      for (std::size_t i = 0; i < n; ++i) {
        const double x = -L + h * static_cast<double>(i);
        const double diff = drift_vals[i] - model.drift_star(x + tau);
        integrand[i] = diff * diff * f[i];
      }
      sep = std::min(sep, trapezoid(integrand, h));
    }
  }
  report.separation = sep;
  report.separation_ok = sep > 1e-10;
  return report;
}

}  // namespace cvmshift
