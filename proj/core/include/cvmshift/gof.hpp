#pragma once

#include <optional>
#include <string>
#include <utility>

#include "cvmshift/estimators.hpp"
#include "cvmshift/invariant_law.hpp"
#include "cvmshift/limit_mc.hpp"
#include "cvmshift/model.hpp"
#include "cvmshift/simulate.hpp"

namespace cvmshift {

enum class StatKind { delta_lte, delta_edf, mu_kernel, ks_lte, ks_edf };

std::string to_string(StatKind kind);
StatKind stat_kind_from_string(const std::string& s);

/// Table kind that thresholds a statistic; throws for the KS kinds.
LimitKind table_kind_for(StatKind kind);

/// Outcome of one test statistic evaluation, optionally with a decision.
struct TestReport {
  StatKind kind = StatKind::delta_lte;
  double value = 0.0;       // the statistic, >= 0
  double theta_hat = 0.0;   // estimator feeding the fitted curve
  std::string model_ref;
  double tail_bound = 0.0;  // bound on the dx-integral mass beyond the grid
  std::optional<double> threshold;
  std::optional<double> epsilon;
  std::optional<bool> reject;
};

/// delta_T = T int (f^_T(x) - f(x - theta^))^2 dx with the MLE and the
/// local-time density estimator, integrated over the law grid.
TestReport cvm_lte(const Path& path, const ShiftDriftModel& model,
                   const InvariantLaw& law);

/// Delta_T = T int (F^_T(x) - F(x - theta^))^2 dx with the MLE and the EDF.
TestReport cvm_edf(const Path& path, const ShiftDriftModel& model,
                   const InvariantLaw& law);

/// mu_T = T int (fbar_T(x) - f(x - theta*))^2 dx with the MDE and the
/// Gaussian kernel estimator.
TestReport cvm_kernel(const Path& path, const ShiftDriftModel& model,
                      const InvariantLaw& law);

/// Kolmogorov-Smirnov statistics sqrt(T) sup |curve - fit| for the LTE and
/// the EDF (no thresholds: their limit laws are not simulated here).
std::pair<TestReport, TestReport> ks_statistics(const Path& path,
                                                const ShiftDriftModel& model,
                                                const InvariantLaw& law);

/// Statistic from an externally supplied curve (tabulated on the law grid)
/// and a fixed estimate; the layer the path-based entry points share, and
/// the hook for perfect-fit harnesses.
TestReport statistic_from_curve(StatKind kind, const CurveEstimate& curve,
                                double theta_hat, const InvariantLaw& law,
                                double T);

/// Fill threshold/epsilon/reject from a quantile table. Rejects on strict
/// inequality statistic > threshold. The table must carry the statistic's
/// limit kind and model.
TestReport decide(const TestReport& statistic, const QuantileTable& table,
                  double epsilon);

}  // namespace cvmshift
