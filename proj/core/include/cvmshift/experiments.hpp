#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cvmshift/gof.hpp"
#include "cvmshift/model.hpp"

namespace cvmshift {

/// Alternative-hypothesis drift named in a config file:
///   linear(c)   S(x) = -c x
///   cubic(c)    S(x) = -c x^3
///   tanh(a,b)   S(x) = -a tanh(x) - b x
struct AlternativeSpec {
  std::string label;
  RealFn drift;
};
AlternativeSpec parse_alternative(const std::string& token);

/// One study definition, loaded from an INI-style config file. Unknown
/// sections or keys are errors.
struct ExperimentConfig {
  std::string model_name = "ou";
  std::map<std::string, double> model_params;

  double T = 200.0;
  double dt = 0.01;
  std::size_t replications = 500;
  std::vector<double> theta0s{0.0};
  std::vector<double> epsilons{0.05};
  std::vector<StatKind> statistics{StatKind::delta_lte, StatKind::delta_edf};
  std::uint64_t seed = 1;
  std::size_t threads = 0;

  std::vector<AlternativeSpec> alternatives;
  std::vector<double> T_list;

  std::map<LimitKind, std::string> tables;  // kind -> table file
  std::size_t limits_n_mc = 100000;
  std::uint64_t limits_seed = 99;

  std::string out_dir = "out";
};

ExperimentConfig load_config(const std::string& file);

struct RateEntry {
  double epsilon = 0.0;
  std::size_t rejections = 0;
  double rate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Per-scenario, per-statistic outcome of a study.
struct ScenarioResult {
  std::string scenario;  // e.g. "theta0=0" or "alt=linear(2) T=200"
  StatKind kind = StatKind::delta_lte;
  std::size_t replications = 0;
  std::vector<double> values;      // statistic per replicate
  std::vector<double> theta_hats;  // estimator per replicate
  std::vector<RateEntry> rates;
};

struct StudyReport {
  std::vector<ScenarioResult> scenarios;
  double wall_seconds = 0.0;
  std::size_t threads_used = 1;
};

/// Size study: H0 paths at every theta0, decisions against the configured
/// tables (missing table files are simulated first and saved). Scenario
/// results are cached under <out_dir>/cache and reruns are byte-identical.
StudyReport run_size_study(const ExperimentConfig& config);

/// Power study: paths from each alternative drift at every T in T_list
/// (config.T when the list is empty), tested against the null family.
StudyReport run_power_study(const ExperimentConfig& config);

/// Rewrites <out_dir>/{size,power}_{rates,statistics,hist}.csv artifacts.
void write_study_csv(const StudyReport& report, const std::string& out_dir,
                     const std::string& study_name);

/// Density curves (Gaussian KDE at 200 centers) and threshold-vs-epsilon
/// tables for the delta and Delta sample batches; emits figure_density.csv
/// and figure_thresholds.csv under out_dir.
struct FigureInputs {
  std::string delta_batch_file;
  std::string Delta_batch_file;
  std::string out_dir = "out";
};
void reproduce_ou_figures(const FigureInputs& inputs);

/// 95% binomial confidence interval, normal approximation with a
/// continuity guard when the count sits at 0 or n.
RateEntry rejection_rate(double epsilon, std::size_t rejections,
                         std::size_t n);

}  // namespace cvmshift
