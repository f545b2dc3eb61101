#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cvmshift/invariant_law.hpp"
#include "cvmshift/numeric.hpp"

namespace cvmshift {

/// Which limit random variable a batch simulates.
enum class LimitKind { delta, Delta, mu };

std::string to_string(LimitKind kind);
LimitKind limit_kind_from_string(const std::string& s);

/// Uniform grid description used in batch/table metadata.
struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  double h = 0.0;

  std::size_t size() const;
  UniformGrid grid() const;
};

/// Monte Carlo draws of one limit law.
struct LimitSampleBatch {
  LimitKind kind = LimitKind::delta;
  std::string model_ref;
  std::vector<double> samples;  // all >= 0, finite
  GridSpec y_grid;
  GridSpec x_grid;
  std::uint64_t seed = 0;
  std::size_t n_mc = 0;
};

/// Optional per-replicate recordings for the distributional oracles:
/// eta[p][r] is the kernel part of the inner integral at probe_x[p],
/// u_hat[r] the estimator-limit draw coupled to the same increments (the
/// MLE score functional for delta/Delta, the MDE functional for mu).
struct LimitDiagnostics {
  std::vector<double> probe_x;
  std::vector<std::vector<double>> eta;
  std::vector<double> u_hat;
};

/// Grid on the law's effective support with h = min(1e-2, L/2000),
/// aligned so that 0 is a node.
GridSpec default_limit_grid(const InvariantLaw& law);

/// Simulate n_mc replicates of the limit variable: per replicate, draw
/// independent N(0, h) increments of a two-sided Wiener process on the
/// y-grid cells (one substream per half-line), evaluate the inner Wiener
/// integral at every x node, square, and integrate over x by trapezoid.
/// Deterministic per (seed, replicate); replicates run on `threads` threads.
LimitSampleBatch simulate_limit(LimitKind kind, const InvariantLaw& law,
                                std::size_t n_mc, std::uint64_t seed,
                                const GridSpec& y_grid, const GridSpec& x_grid,
                                LimitDiagnostics* diagnostics = nullptr,
                                std::size_t threads = 1);

/// Convenience overload on the default grids.
LimitSampleBatch simulate_limit(LimitKind kind, const InvariantLaw& law,
                                std::size_t n_mc, std::uint64_t seed,
                                LimitDiagnostics* diagnostics = nullptr,
                                std::size_t threads = 1);

/// Precomputed kernel tables for the reduction; exposed so tests can pair
/// the fast path against a direct double-loop oracle and drive common-
/// random-number grid studies with injected increments.
class LimitIntegrand {
 public:
  LimitIntegrand(LimitKind kind, const InvariantLaw& law,
                 const GridSpec& y_grid, const GridSpec& x_grid);

  /// One replicate from externally supplied cell increments (size = number
  /// of y cells). Records eta/u_hat when the out-parameters are given.
  /// u_extra is reserved and currently unused.
  double sample_from_increments(std::span<const double> dW, double u_extra,
                                std::vector<double>* eta_probe = nullptr,
                                double* u_out = nullptr) const;

  std::size_t cell_count() const { return y_nodes_.size() - 1; }
  const std::vector<double>& y_nodes() const { return y_nodes_; }
  const std::vector<double>& x_nodes() const { return x_nodes_; }
  void set_probe(std::span<const double> probe_x);
  double mde_variance() const { return r0_; }

 private:
  LimitKind kind_;
  double fisher_ = 1.0;
  double r0_ = 0.0;  // MDE limit variance R(0), kind mu only
  double x_h_ = 0.0;
  std::vector<double> y_nodes_, x_nodes_;
  std::vector<double> inv_sqrt_fy_;   // 1/sqrt(f(y_j))
  std::vector<double> Fy_;            // F(y_j)
  std::vector<double> score_w_;       // S*'(y_j) sqrt(f(y_j))
  std::vector<double> mde_w_;         // q(y_j) sqrt(f(y_j)), kind mu
  std::vector<double> fx_, Fx_, dfx_;  // f, F, f' on x nodes
  std::vector<std::size_t> first_cell_above_;  // per x node
  std::vector<std::size_t> probe_idx_;
};

/// Asymptotic variance R(0) of the minimum-distance estimator, from the
/// sandwich formula: with q(y) = (1/||f||^2) integral H(y,x) f(x) dx,
/// R(0) = integral q(y)^2 f(y) dy.
double mde_limit_variance(const InvariantLaw& law);

/// Upper-quantile table for one limit law.
struct QuantileTable {
  LimitKind kind = LimitKind::delta;
  std::string model_ref;
  std::vector<double> epsilons;    // increasing, in (0,1)
  std::vector<double> thresholds;  // strictly decreasing
  std::size_t n_mc = 0;
  std::uint64_t seed = 0;
  GridSpec y_grid;
  GridSpec x_grid;

  /// Threshold for a supported epsilon; throws ConfigError otherwise.
  double threshold_for(double epsilon) const;
};

/// Empirical 1-eps quantiles: order statistic at rank ceil(n_mc (1-eps)),
/// no interpolation. Requires n_mc >= 100 / min(eps).
QuantileTable estimate_quantiles(const LimitSampleBatch& batch,
                                 std::span<const double> epsilons);

}  // namespace cvmshift
