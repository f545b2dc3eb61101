#include "cvmshift/gof.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cvmshift/errors.hpp"

namespace cvmshift {

std::string to_string(StatKind kind) {
  switch (kind) {
    case StatKind::delta_lte: return "delta_lte";
    case StatKind::delta_edf: return "delta_edf";
    case StatKind::mu_kernel: return "mu_kernel";
    case StatKind::ks_lte: return "ks_lte";
    case StatKind::ks_edf: return "ks_edf";
  }
  return "?";
}

StatKind stat_kind_from_string(const std::string& s) {
  if (s == "delta_lte") return StatKind::delta_lte;
  if (s == "delta_edf") return StatKind::delta_edf;
  if (s == "mu_kernel") return StatKind::mu_kernel;
  if (s == "ks_lte") return StatKind::ks_lte;
  if (s == "ks_edf") return StatKind::ks_edf;
  throw ConfigError("unknown statistic kind '" + s + "'");
}

LimitKind table_kind_for(StatKind kind) {
  switch (kind) {
    case StatKind::delta_lte: return LimitKind::delta;
    case StatKind::delta_edf: return LimitKind::Delta;
    case StatKind::mu_kernel: return LimitKind::mu;
    default:
      throw ConfigError("no threshold table kind for statistic '" +
                        to_string(kind) + "'");
  }
}

namespace {

bool is_density_kind(StatKind kind) {
  return kind == StatKind::delta_lte || kind == StatKind::mu_kernel ||
         kind == StatKind::ks_lte;
}

// Mass of the neglected dx-tail beyond the grid, from the exponential
// tail bound: the fitted curve discrepancy out there is dominated by the
// model curve itself.
double tail_bound(StatKind kind, const InvariantLaw& law, double theta_hat,
                  double T) {
  const double L = law.grid().hi();
  const double g = law.tail_gamma();
  const double C = law.tail_C();
  const double reach = std::max(L - std::abs(theta_hat), law.tail_A());
  if (is_density_kind(kind)) {
    // T * 2 int_reach^inf (C e^{-2 g x})^2 dx
    return T * C * C * std::exp(-4.0 * g * reach) / g;
  }
  // CDF tails: F and 1-F are bounded by (C/2g) e^{-2 g x}.
  const double c = C / (2.0 * g);
  return T * c * c * std::exp(-4.0 * g * reach) / g;
}

}  // namespace

TestReport statistic_from_curve(StatKind kind, const CurveEstimate& curve,
                                double theta_hat, const InvariantLaw& law,
                                double T) {
  const auto& grid = law.grid();
  if (curve.values.size() != grid.size()) {
    throw std::invalid_argument("curve is not tabulated on the law grid");
  }
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");

  const bool density = is_density_kind(kind);
  const std::size_t n = grid.size();

  TestReport report;
  report.kind = kind;
  report.theta_hat = theta_hat;
  report.model_ref = law.model_ref();
  report.tail_bound = tail_bound(kind, law, theta_hat, T);

  if (kind == StatKind::ks_lte || kind == StatKind::ks_edf) {
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid.node(i);
      const double fit =
          density ? law.density(x, theta_hat) : law.cdf(x, theta_hat);
      sup = std::max(sup, std::abs(curve.values[i] - fit));
    }
    report.value = std::sqrt(T) * sup;
    return report;
  }

  std::vector<double> diff2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.node(i);
    const double fit =
        density ? law.density(x, theta_hat) : law.cdf(x, theta_hat);
    const double d = curve.values[i] - fit;
    diff2[i] = d * d;
  }
  report.value = T * trapezoid(diff2, grid.h());
  return report;
}

TestReport cvm_lte(const Path& path, const ShiftDriftModel& model,
                   const InvariantLaw& law) {
  const auto est = mle_shift(path, model);
  const auto curve = lte_density(path, law.grid_nodes());
  return statistic_from_curve(StatKind::delta_lte, curve, est.theta_hat, law,
                              path.duration());
}

TestReport cvm_edf(const Path& path, const ShiftDriftModel& model,
                   const InvariantLaw& law) {
  const auto est = mle_shift(path, model);
  const auto curve = edf(path, law.grid_nodes());
  return statistic_from_curve(StatKind::delta_edf, curve, est.theta_hat, law,
                              path.duration());
}

TestReport cvm_kernel(const Path& path, const ShiftDriftModel& model,
                      const InvariantLaw& law) {
  const auto est = mde_shift(path, model, law);
  const auto curve = kernel_density(path, law.grid_nodes());
  return statistic_from_curve(StatKind::mu_kernel, curve, est.theta_hat, law,
                              path.duration());
}

std::pair<TestReport, TestReport> ks_statistics(const Path& path,
                                                const ShiftDriftModel& model,
                                                const InvariantLaw& law) {
  const auto est = mle_shift(path, model);
  const auto nodes = law.grid_nodes();
  const auto lte = lte_density(path, nodes);
  const auto F_hat = edf(path, nodes);
  const double T = path.duration();
  return {statistic_from_curve(StatKind::ks_lte, lte, est.theta_hat, law, T),
          statistic_from_curve(StatKind::ks_edf, F_hat, est.theta_hat, law,
                               T)};
}

TestReport decide(const TestReport& statistic, const QuantileTable& table,
                  double epsilon) {
  const LimitKind want = table_kind_for(statistic.kind);
  if (table.kind != want) {
    throw ConfigError("table kind '" + to_string(table.kind) +
                      "' does not match statistic '" +
                      to_string(statistic.kind) + "'");
  }
  if (!statistic.model_ref.empty() && table.model_ref != statistic.model_ref) {
    throw ConfigError("table was simulated for model '" + table.model_ref +
                      "', statistic is for '" + statistic.model_ref + "'");
  }
  TestReport out = statistic;
  out.threshold = table.threshold_for(epsilon);
  out.epsilon = epsilon;
  out.reject = statistic.value > *out.threshold;  // strict, ties accept
  return out;
}

}  // namespace cvmshift
