#include "cvmshift/limit_mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "cvmshift/errors.hpp"
#include "cvmshift/parallel.hpp"
#include "cvmshift/rng.hpp"

namespace cvmshift {

std::size_t resolve_threads(std::size_t requested) noexcept {
  if (requested != 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  threads = std::min(resolve_threads(threads), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string to_string(LimitKind kind) {
  switch (kind) {
    case LimitKind::delta: return "delta";
    case LimitKind::Delta: return "Delta";
    case LimitKind::mu: return "mu";
  }
  return "?";
}

LimitKind limit_kind_from_string(const std::string& s) {
  if (s == "delta") return LimitKind::delta;
  if (s == "Delta") return LimitKind::Delta;
  if (s == "mu") return LimitKind::mu;
  throw ConfigError("unknown limit kind '" + s + "'");
}

std::size_t GridSpec::size() const {
  if (!(h > 0.0) || !(hi > lo)) throw std::invalid_argument("bad grid spec");
  return static_cast<std::size_t>(std::llround((hi - lo) / h)) + 1;
}

UniformGrid GridSpec::grid() const { return UniformGrid(lo, h, size()); }

GridSpec default_limit_grid(const InvariantLaw& law) {
  const auto [lo, hi] = law.effective_support();
  const double L = law.grid().hi();
  const double h = std::min(1e-2, L / 2000.0);
  // Shrink inward to multiples of h so 0 is a node and every node stays
  // inside the effective support.
  const double m_neg = std::floor(-lo / h);
  const double m_pos = std::floor(hi / h);
  return GridSpec{-m_neg * h, m_pos * h, h};
}

LimitIntegrand::LimitIntegrand(LimitKind kind, const InvariantLaw& law,
                               const GridSpec& y_grid, const GridSpec& x_grid)
    : kind_(kind) {
  fisher_ = law.fisher();
  if (!std::isfinite(fisher_) || !(fisher_ > 0.0)) {
    throw ConditionError("limit simulation needs a positive Fisher "
                         "information (law built with a derivative)");
  }
  y_nodes_ = y_grid.grid().nodes();
  x_nodes_ = x_grid.grid().nodes();
  if (y_nodes_.size() < 3 || x_nodes_.size() < 3) {
    throw std::invalid_argument("limit grids need at least 3 nodes");
  }
  x_h_ = x_grid.h;

  const auto [supp_lo, supp_hi] = law.effective_support();
  if (y_nodes_.front() < supp_lo - 1e-12 ||
      y_nodes_.back() > supp_hi + 1e-12) {
    throw std::invalid_argument(
        "y grid extends beyond the law's effective support");
  }

  const std::size_t ny = y_nodes_.size();
  inv_sqrt_fy_.resize(ny);
  Fy_.resize(ny);
  score_w_.resize(ny);
  for (std::size_t j = 0; j < ny; ++j) {
    const double y = y_nodes_[j];
    const double fy = law.density(y);
    if (!(fy > 0.0)) {
      throw std::invalid_argument("y grid hits f = 0 inside the support");
    }
    const double root = std::sqrt(fy);
    inv_sqrt_fy_[j] = 1.0 / root;
    Fy_[j] = law.cdf(y);
    score_w_[j] = law.drift_deriv(y) * root;
  }

  const std::size_t nx = x_nodes_.size();
  fx_.resize(nx);
  Fx_.resize(nx);
  dfx_.resize(nx);
  first_cell_above_.resize(nx);
  const std::size_t n_cells = ny - 1;
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = x_nodes_[i];
    fx_[i] = law.density(x);
    Fx_[i] = law.cdf(x);
    dfx_[i] = law.density_deriv(x);
    // First cell whose left node lies strictly above x.
    const auto it = std::upper_bound(y_nodes_.begin(),
                                     y_nodes_.begin() + n_cells, x);
    first_cell_above_[i] =
        static_cast<std::size_t>(it - y_nodes_.begin());
  }

  if (kind_ == LimitKind::mu) {
    r0_ = mde_limit_variance(law);
    // Coupled MDE-limit draw: u* = sum q(y_j) sqrt(f(y_j)) dW_j with
    // q(y) = -(1/||f||^2) integral H(y, x) f(x) dx, the linear functional
    // of the same Wiener path that the minimum distance estimator's
    // fluctuation converges to. Its variance is R(0) by construction.
    const auto [supp_lo2, supp_hi2] = law.effective_support();
    const auto& lgrid = law.grid();
    const auto i_lo = static_cast<std::size_t>(
        std::ceil((supp_lo2 - lgrid.lo()) / lgrid.h()));
    const auto i_hi = static_cast<std::size_t>(
        std::floor((supp_hi2 - lgrid.lo()) / lgrid.h()));
    const std::size_t nn = i_hi - i_lo + 1;
    std::vector<double> xs(nn), fs(nn);
    double f_norm2 = 0.0;
    {
      std::vector<double> f2(nn);
      for (std::size_t i = 0; i < nn; ++i) {
        xs[i] = lgrid.node(i_lo + i);
        fs[i] = law.density(xs[i]);
        f2[i] = fs[i] * fs[i];
      }
      f_norm2 = trapezoid(f2, lgrid.h());
    }
    mde_w_.resize(ny);
    std::vector<double> integrand(nn);
    for (std::size_t j = 0; j < ny; ++j) {
      const double y = y_nodes_[j];
      for (std::size_t i = 0; i < nn; ++i) {
        integrand[i] = law.kernel_H(y, xs[i]) * fs[i];
      }
      const double q = -trapezoid(integrand, lgrid.h()) / f_norm2;
      mde_w_[j] = q / inv_sqrt_fy_[j];  // q(y_j) sqrt(f(y_j))
    }
  }
}

void LimitIntegrand::set_probe(std::span<const double> probe_x) {
  probe_idx_.clear();
  for (const double p : probe_x) {
    const auto it = std::min_element(
        x_nodes_.begin(), x_nodes_.end(), [p](double a, double b) {
          return std::abs(a - p) < std::abs(b - p);
        });
    probe_idx_.push_back(static_cast<std::size_t>(it - x_nodes_.begin()));
  }
}

double LimitIntegrand::sample_from_increments(std::span<const double> dW,
                                              double u_extra,
                                              std::vector<double>* eta_probe,
                                              double* u_out) const {
  const std::size_t n_cells = cell_count();
  if (dW.size() != n_cells) {
    throw std::invalid_argument("increment count must equal the cell count");
  }

  // a_j = dW_j / sqrt(f(y_j)); the inner integral at every x reduces to
  // suffix sums R(x) = sum_{y_j > x} a_j, the constant B = sum F(y_j) a_j,
  // prefix sums P(x) = sum_{y_j <= x} F(y_j) a_j, and the score integral
  // u_hat = (1/I) sum S*'(y_j) sqrt(f(y_j)) dW_j:
  //   delta kernel:  2 f(x) (R(x) - B)            + u_hat f'(x)
  //   Delta kernel:  2 (P(x) + F(x)(R(x) - B))    + u_hat f(x)
  //   mu kernel:     2 f(x) (R(x) - B)            + u*    f'(x)
  // The + coupling is the orientation the fitted statistic actually has:
  // the fitted curve expands as F(x - t^) = F(x - t0) - (t^ - t0) f(x - .),
  // so the estimator term enters the normalized difference with a plus.
  std::vector<double> suffix(n_cells + 1, 0.0);
  std::vector<double> prefix(n_cells + 1, 0.0);
  double B = 0.0;
  double score = 0.0;
  for (std::size_t j = 0; j < n_cells; ++j) {
    const double a = dW[j] * inv_sqrt_fy_[j];
    prefix[j + 1] = prefix[j] + Fy_[j] * a;
    score += score_w_[j] * dW[j];
  }
  for (std::size_t j = n_cells; j-- > 0;) {
    suffix[j] = suffix[j + 1] + dW[j] * inv_sqrt_fy_[j];
  }
  B = prefix[n_cells];
  double u_used;
  if (kind_ == LimitKind::mu) {
    double mde_score = 0.0;
    for (std::size_t j = 0; j < n_cells; ++j) {
      mde_score += mde_w_[j] * dW[j];
    }
    u_used = mde_score;
    (void)u_extra;
  } else {
    u_used = score / fisher_;
  }

  const std::size_t nx = x_nodes_.size();
  std::vector<double> zeta2(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    const std::size_t k = first_cell_above_[i];
    const double R = suffix[k];
    double zeta;
    if (kind_ == LimitKind::Delta) {
      zeta = 2.0 * (prefix[k] + Fx_[i] * (R - B)) + u_used * fx_[i];
    } else {
      zeta = 2.0 * fx_[i] * (R - B) + u_used * dfx_[i];
    }
    zeta2[i] = zeta * zeta;
  }
  const double sample = trapezoid(zeta2, x_h_);
  if (!std::isfinite(sample)) {
    throw NumericError("limit sample is not finite");
  }

  if (eta_probe != nullptr) {
    eta_probe->clear();
    for (const std::size_t i : probe_idx_) {
      const std::size_t k = first_cell_above_[i];
      const double R = suffix[k];
      if (kind_ == LimitKind::Delta) {
        eta_probe->push_back(2.0 * (prefix[k] + Fx_[i] * (R - B)));
      } else {
        eta_probe->push_back(2.0 * fx_[i] * (R - B));
      }
    }
  }
  if (u_out != nullptr) *u_out = u_used;
  return sample;
}

namespace {

// Streams inside a replicate: positive-side increments, negative-side
// increments, and the independent draw used by kind mu.
constexpr std::uint64_t kStreamsPerReplicate = 3;

}  // namespace

LimitSampleBatch simulate_limit(LimitKind kind, const InvariantLaw& law,
                                std::size_t n_mc, std::uint64_t seed,
                                const GridSpec& y_grid, const GridSpec& x_grid,
                                LimitDiagnostics* diagnostics,
                                std::size_t threads) {
  if (n_mc < 1) throw std::invalid_argument("n_mc must be >= 1");
  LimitIntegrand integrand(kind, law, y_grid, x_grid);

  LimitSampleBatch batch;
  batch.kind = kind;
  batch.model_ref = law.model_ref();
  batch.y_grid = y_grid;
  batch.x_grid = x_grid;
  batch.seed = seed;
  batch.n_mc = n_mc;
  batch.samples.resize(n_mc);

  const std::size_t n_probe =
      diagnostics == nullptr ? 0 : diagnostics->probe_x.size();
  if (diagnostics != nullptr) {
    integrand.set_probe(diagnostics->probe_x);
    diagnostics->eta.assign(n_probe, std::vector<double>(n_mc, 0.0));
    diagnostics->u_hat.assign(n_mc, 0.0);
  }

  const std::size_t n_cells = integrand.cell_count();
  const auto& y_nodes = integrand.y_nodes();
  const double sqrt_h = std::sqrt(y_grid.h);

  parallel_for(n_mc, threads, [&](std::size_t r) {
    std::vector<double> dW(n_cells);
    const CounterRng pos{seed, kStreamsPerReplicate * r + 0};
    const CounterRng neg{seed, kStreamsPerReplicate * r + 1};
    for (std::size_t j = 0; j < n_cells; ++j) {
      const CounterRng& rng = y_nodes[j] >= 0.0 ? pos : neg;
      dW[j] = sqrt_h * rng.normal(j);
    }
    std::vector<double> eta;
    double u_val = 0.0;
    double sample;
    try {
      sample = integrand.sample_from_increments(
          dW, 0.0, diagnostics != nullptr ? &eta : nullptr,
          diagnostics != nullptr ? &u_val : nullptr);
    } catch (const NumericError&) {
      throw NumericError("limit replicate " + std::to_string(r) +
                         " produced a non-finite sample");
    }
    batch.samples[r] = sample;
    if (diagnostics != nullptr) {
      for (std::size_t p = 0; p < n_probe; ++p) {
        diagnostics->eta[p][r] = eta[p];
      }
      diagnostics->u_hat[r] = u_val;
    }
  });
  return batch;
}

LimitSampleBatch simulate_limit(LimitKind kind, const InvariantLaw& law,
                                std::size_t n_mc, std::uint64_t seed,
                                LimitDiagnostics* diagnostics,
                                std::size_t threads) {
  const GridSpec g = default_limit_grid(law);
  return simulate_limit(kind, law, n_mc, seed, g, g, diagnostics, threads);
}

double mde_limit_variance(const InvariantLaw& law) {
  const auto [lo, hi] = law.effective_support();
  const auto& grid = law.grid();
  const auto i_lo = static_cast<std::size_t>(
      std::ceil((lo - grid.lo()) / grid.h()));
  const auto i_hi = static_cast<std::size_t>(
      std::floor((hi - grid.lo()) / grid.h()));
  if (i_hi <= i_lo + 2) throw NumericError("effective support is degenerate");
  const std::size_t n = i_hi - i_lo + 1;
  const double h = grid.h();

  std::vector<double> x(n), f(n), F(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = grid.node(i_lo + i);
    f[i] = law.density(x[i]);
    F[i] = law.cdf(x[i]);
  }
  std::vector<double> f2(n);
  for (std::size_t i = 0; i < n; ++i) f2[i] = f[i] * f[i];
  const double f_norm2 = trapezoid(f2, h);

  // q(y) = (1/||f||^2) integral H(y, x) f(x) dx, with
  // H(y, x) = 2 (F(y ^ x) - F(y) F(x)) / f(y).
  std::vector<double> integrand(n), q2f(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double Fmin = std::min(F[j], F[i]);
      integrand[i] = 2.0 * (Fmin - F[j] * F[i]) / f[j] * f[i];
    }
    const double q = trapezoid(integrand, h) / f_norm2;
    q2f[j] = q * q * f[j];
  }
  return trapezoid(q2f, h);
}

double QuantileTable::threshold_for(double epsilon) const {
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (std::abs(epsilons[i] - epsilon) < 1e-12) return thresholds[i];
  }
  throw ConfigError("epsilon " + std::to_string(epsilon) +
                    " is not in the table's supported set");
}

QuantileTable estimate_quantiles(const LimitSampleBatch& batch,
                                 std::span<const double> epsilons) {
  if (epsilons.empty()) throw std::invalid_argument("no epsilons requested");
  std::vector<double> eps(epsilons.begin(), epsilons.end());
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  for (const double e : eps) {
    if (!(e > 0.0 && e < 1.0)) {
      throw std::invalid_argument("epsilons must lie in (0,1)");
    }
  }
  const double min_eps = eps.front();
  const auto n = batch.samples.size();
  // At least 5 samples above the requested quantile, otherwise the order
  // statistic is meaningless.
  if (static_cast<double>(n) * min_eps < 5.0) {
    throw ConfigError("insufficient samples for eps = " +
                      std::to_string(min_eps) + ": need n_mc >= " +
                      std::to_string(5.0 / min_eps));
  }

  std::vector<double> sorted = batch.samples;
  std::sort(sorted.begin(), sorted.end());

  QuantileTable table;
  table.kind = batch.kind;
  table.model_ref = batch.model_ref;
  table.n_mc = batch.n_mc;
  table.seed = batch.seed;
  table.y_grid = batch.y_grid;
  table.x_grid = batch.x_grid;
  table.epsilons = eps;
  table.thresholds.reserve(eps.size());
  for (const double e : eps) {
    const auto rank = static_cast<std::size_t>(
        std::ceil(static_cast<double>(n) * (1.0 - e)));
    table.thresholds.push_back(sorted[std::min(rank, n) - 1]);
  }
  for (std::size_t i = 1; i < table.thresholds.size(); ++i) {
    if (!(table.thresholds[i] < table.thresholds[i - 1])) {
      throw NumericError(
          "quantile thresholds are not strictly decreasing in epsilon "
          "(atoms in the sample?)");
    }
  }
  return table;
}

}  // namespace cvmshift
