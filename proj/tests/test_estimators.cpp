#include <cmath>

#include "cvmshift/estimators.hpp"
#include "cvmshift/invariant_law.hpp"
#include "cvmshift/model.hpp"
#include "cvmshift/rng.hpp"
#include "cvmshift/simulate.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace cvmshift;

namespace {

Path constant_path(double c, double dt, std::size_t n) {
  Path p;
  p.dt = dt;
  p.values.assign(n, c);
  return p;
}

// Closed-form OU MLE, discretized exactly like the implementation:
// (1/T) sum X_k dt + (X_T - X_0)/T over left endpoints.
double ou_closed_form_mle(const Path& path) {
  const double T = path.duration();
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < path.values.size(); ++k) {
    sum += path.values[k];
  }
  return sum * path.dt / T +
         (path.values.back() - path.values.front()) / T;
}

}  // namespace

TEST_CASE("constant-path likelihood is the exact quadratic") {
  const auto ou = make_model("ou");
  const Path p = constant_path(1.4, 0.1, 101);
  const double T = p.duration();
  for (const double theta : {-3.0, -0.5, 0.0, 1.4, 2.9}) {
    CHECK(log_likelihood(p, ou, theta) ==
          doctest::Approx(-0.5 * T * (1.4 - theta) * (1.4 - theta))
              .epsilon(1e-12));
  }
  const auto est = mle_shift(p, ou);
  CHECK(est.theta_hat == doctest::Approx(1.4).epsilon(1e-9));
  CHECK_FALSE(est.boundary_hit);
}

TEST_CASE("OU likelihood matches its analytic quadratic coefficients") {
  const auto ou = make_model("ou");
  const Path p =
      simulate_path(ou, 0.5, 50.0, 0.01, 3, InitRule::fixed(0.5));
  // L(theta) = c0 + c1 theta - c2/2 theta^2 with
  // c1 = (X_T - X_0) + dt sum X_k, c2 = dt m
  const auto& v = p.values;
  const std::size_t m = v.size() - 1;
  double sum_x = 0.0, sum_x2 = 0.0, sum_xdx = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    sum_x += v[k];
    sum_x2 += v[k] * v[k];
    sum_xdx += v[k] * (v[k + 1] - v[k]);
  }
  const double c0 = -sum_xdx - 0.5 * p.dt * sum_x2;
  const double c1 = (v.back() - v.front()) + p.dt * sum_x;
  const double c2 = p.dt * static_cast<double>(m);
  for (const double theta : {-2.0, -0.3, 0.5, 1.1, 4.0}) {
    const double expected = c0 + c1 * theta - 0.5 * c2 * theta * theta;
    CHECK(log_likelihood(p, ou, theta) ==
          doctest::Approx(expected).epsilon(1e-10));
  }
  // quadratic => concave second differences on a theta grid
  const double h = 0.25;
  for (double theta = -4.0; theta <= 4.0; theta += h) {
    const double second = log_likelihood(p, ou, theta + h) -
                          2.0 * log_likelihood(p, ou, theta) +
                          log_likelihood(p, ou, theta - h);
    CHECK(second <= 1e-9);
  }
}

TEST_CASE("likelihood is invariant under a joint data/parameter shift") {
  const auto ou = make_model("ou");
  const Path p = simulate_path(ou, 0.0, 20.0, 0.01, 5, InitRule::fixed(0.0));
  Path shifted = p;
  const double c = 0.8;
  for (auto& x : shifted.values) x += c;
  for (const double theta : {-1.0, 0.0, 0.6}) {
    CHECK(log_likelihood(shifted, ou, theta + c) ==
          doctest::Approx(log_likelihood(p, ou, theta)).epsilon(1e-9));
  }
}

TEST_CASE("numeric MLE matches the OU closed form") {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Path p = simulate_path(ou, 1.0, 100.0, 0.01, derive_seed(20, seed),
                                 InitRule::stationary(), &law);
    const auto est = mle_shift(p, ou);
    CHECK(std::abs(est.theta_hat - ou_closed_form_mle(p)) < 1e-3);
    CHECK_FALSE(est.boundary_hit);
  }
}

TEST_CASE("MLE is shift-equivariant") {
  const auto ou = make_model("ou");
  const Path p = simulate_path(ou, 0.3, 50.0, 0.01, 17, InitRule::fixed(0.3));
  Path shifted = p;
  const double c = 1.5;
  for (auto& x : shifted.values) x += c;
  const double a = mle_shift(p, ou).theta_hat;
  const double b = mle_shift(shifted, ou).theta_hat;
  CHECK(std::abs(b - (a + c)) < 1e-8);
}

TEST_CASE("MLE reports a boundary hit") {
  const auto ou = make_model("ou");
  const auto est = mle_shift(constant_path(10.0, 0.1, 51), ou);
  CHECK(est.theta_hat == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(est.boundary_hit);
}

TEST_CASE("objective curve is recorded on request") {
  const auto ou = make_model("ou");
  const Path p = simulate_path(ou, 0.0, 20.0, 0.01, 9, InitRule::fixed(0.0));
  OptimOptions opt;
  opt.record_curve = true;
  const auto est = mle_shift(p, ou, opt);
  REQUIRE(est.objective_curve.size() == opt.grid_points);
  for (std::size_t i = 1; i < est.objective_curve.size(); ++i) {
    CHECK(est.objective_curve[i].first > est.objective_curve[i - 1].first);
  }
}

TEST_CASE("MDE recovers an injected exact curve") {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  const double theta0 = 1.7;
  CurveEstimate exact;
  exact.kind = CurveKind::edf;
  exact.x = law.grid_nodes();
  exact.values.resize(exact.x.size());
  for (std::size_t i = 0; i < exact.x.size(); ++i) {
    exact.values[i] = law.cdf(exact.x[i], theta0);
  }
  const auto est = mde_shift_from_curve(exact, ou, law);
  CHECK(std::abs(est.theta_hat - theta0) < 1e-8);
  CHECK(est.method == ShiftMethod::mde);
  CHECK(mde_objective(exact, law, est.theta_hat) <=
        mde_objective(exact, law, theta0) + 1e-15);
}

TEST_CASE("MDE is consistent and its error shrinks with T") {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  const double theta0 = 2.0;

  const Path p = simulate_path(ou, theta0, 1000.0, 0.01, 33,
                               InitRule::stationary(), &law);
  const auto est = mde_shift(p, ou, law);
  CHECK(std::abs(est.theta_hat - theta0) < 0.15);
  // minimizer beats the true parameter on the sample objective
  const auto curve = edf(p, law.grid_nodes());
  CHECK(mde_objective(curve, law, est.theta_hat) <=
        mde_objective(curve, law, theta0) + 1e-15);

  std::vector<double> err_short, err_long;
  for (std::uint64_t s = 0; s < 16; ++s) {
    const Path a = simulate_path(ou, theta0, 250.0, 0.01, derive_seed(60, s),
                                 InitRule::stationary(), &law);
    const Path b = simulate_path(ou, theta0, 1000.0, 0.01, derive_seed(61, s),
                                 InitRule::stationary(), &law);
    err_short.push_back(std::abs(mde_shift(a, ou, law).theta_hat - theta0));
    err_long.push_back(std::abs(mde_shift(b, ou, law).theta_hat - theta0));
  }
  CHECK(test::median(err_long) < test::median(err_short));
}

TEST_CASE("LTE integrates to one and vanishes off the path range") {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  const Path p =
      simulate_path(ou, 0.0, 100.0, 0.01, 2, InitRule::stationary(), &law);
  const auto curve = lte_density(p, law.grid_nodes());
  CHECK(trapezoid(curve.values, law.grid().h()) ==
        doctest::Approx(1.0).epsilon(0.05));

  // far below the path the telescoping cancels to zero
  CHECK(std::abs(curve.values.front()) < 1e-12);
  CHECK(std::abs(curve.values.back()) < 1e-12);
}

TEST_CASE("LTE tracks the invariant density for long paths") {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  const double theta0 = 1.0;
  const Path p = simulate_path(ou, theta0, 1000.0, 0.01, 4,
                               InitRule::stationary(), &law);
  const auto curve = lte_density(p, law.grid_nodes());
  double sup = 0.0;
  double l1 = 0.0;
  const auto& grid = law.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double err =
        std::abs(curve.values[i] - law.density(grid.node(i), theta0));
    sup = std::max(sup, err);
  }
  CHECK(sup < 0.1);

  // occupation-histogram oracle: bin the path, compare in L1
  const double lo = -3.0 + theta0, hi = 3.0 + theta0;
  const std::size_t bins = 40;
  std::vector<double> hist(bins, 0.0);
  std::size_t inside = 0;
  for (const double v : p.values) {
    if (v < lo || v >= hi) continue;
    ++hist[static_cast<std::size_t>((v - lo) / (hi - lo) *
                                    static_cast<double>(bins))];
    ++inside;
  }
  const double bw = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double center = lo + bw * (static_cast<double>(b) + 0.5);
    const double hist_density =
        hist[b] / (static_cast<double>(inside) * bw);
    const double lte_at =
        grid.interpolate(curve.values, center, 0.0);
    l1 += std::abs(hist_density - lte_at) * bw;
  }
  CHECK(l1 < 0.1);
}

TEST_CASE("EDF basics and Glivenko-Cantelli behaviour") {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  const Path p =
      simulate_path(ou, 0.0, 100.0, 0.01, 12, InitRule::stationary(), &law);
  const auto curve = edf(p, law.grid_nodes());
  CHECK(curve.values.front() == 0.0);
  CHECK(curve.values.back() == 1.0);
  for (std::size_t i = 1; i < curve.values.size(); ++i) {
    CHECK(curve.values[i] >= curve.values[i - 1]);
  }

  std::size_t good = 0;
  const std::size_t n_seeds = 50;
  for (std::uint64_t s = 0; s < n_seeds; ++s) {
    const Path q = simulate_path(ou, 0.0, 1000.0, 0.01, derive_seed(70, s),
                                 InitRule::stationary(), &law);
    const auto c = edf(q, law.grid_nodes());
    double sup = 0.0;
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      sup = std::max(sup,
                     std::abs(c.values[i] - law.cdf(law.grid().node(i))));
    }
    if (sup < 0.05) ++good;
  }
  CHECK(good >= 45);  // 90% of seeds
}

TEST_CASE("kernel density estimate behaves like the LTE") {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  const Path p =
      simulate_path(ou, 0.5, 1000.0, 0.01, 6, InitRule::stationary(), &law);
  const auto curve = kernel_density(p, law.grid_nodes());
  for (const double v : curve.values) CHECK(v >= 0.0);
  CHECK(trapezoid(curve.values, law.grid().h()) ==
        doctest::Approx(1.0).epsilon(0.05));

  std::vector<double> diff2(curve.values.size());
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    const double d = curve.values[i] - law.density(law.grid().node(i), 0.5);
    diff2[i] = d * d;
  }
  CHECK(std::sqrt(trapezoid(diff2, law.grid().h())) < 0.05);
}

TEST_CASE("integrated LTE tracks the EDF") {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  const Path p =
      simulate_path(ou, 0.0, 1000.0, 0.01, 8, InitRule::stationary(), &law);
  const auto fhat = lte_density(p, law.grid_nodes());
  const auto Fhat = edf(p, law.grid_nodes());
  const auto cum = cumulative_trapezoid(fhat.values, law.grid().h());
  double sup = 0.0;
  for (std::size_t i = 0; i < cum.size(); ++i) {
    sup = std::max(sup, std::abs(cum[i] - Fhat.values[i]));
  }
  CHECK(sup < 0.05);
}
