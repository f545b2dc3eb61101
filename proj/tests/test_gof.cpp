#include <cmath>

#include "cvmshift/errors.hpp"
#include "cvmshift/gof.hpp"
#include "cvmshift/rng.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace cvmshift;

namespace {

CurveEstimate model_curve(StatKind kind, const InvariantLaw& law,
                          double theta) {
  CurveEstimate c;
  c.kind = kind == StatKind::delta_edf || kind == StatKind::ks_edf
               ? CurveKind::edf
               : CurveKind::lte;
  c.x = law.grid_nodes();
  c.values.resize(c.x.size());
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    c.values[i] = (c.kind == CurveKind::edf) ? law.cdf(c.x[i], theta)
                                             : law.density(c.x[i], theta);
  }
  return c;
}

QuantileTable fake_table(LimitKind kind) {
  QuantileTable t;
  t.kind = kind;
  t.model_ref = "ou";
  t.epsilons = {0.01, 0.05, 0.10};
  t.thresholds = {3.0, 2.0, 1.0};
  t.n_mc = 1000;
  t.seed = 1;
  return t;
}

}  // namespace

TEST_CASE("perfect-fit harness yields exactly zero for all statistics") {
  const InvariantLaw law(make_model("ou"));
  const double theta = 0.8;
  for (const StatKind kind :
       {StatKind::delta_lte, StatKind::delta_edf, StatKind::mu_kernel,
        StatKind::ks_lte, StatKind::ks_edf}) {
    const auto curve = model_curve(kind, law, theta);
    const auto report = statistic_from_curve(kind, curve, theta, law, 200.0);
    CHECK(report.value == 0.0);
    CHECK(report.theta_hat == theta);
  }
}

TEST_CASE("statistics from real paths are finite and nonnegative") {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  const Path p =
      simulate_path(ou, 1.0, 50.0, 0.01, 77, InitRule::stationary(), &law);

  const auto d1 = cvm_lte(p, ou, law);
  const auto d2 = cvm_edf(p, ou, law);
  const auto d3 = cvm_kernel(p, ou, law);
  const auto [k1, k2] = ks_statistics(p, ou, law);
  for (const auto* r : {&d1, &d2, &d3, &k1, &k2}) {
    CHECK(std::isfinite(r->value));
    CHECK(r->value >= 0.0);
    CHECK(r->model_ref == "ou");
    CHECK(r->tail_bound >= 0.0);
    CHECK(r->tail_bound < 1e-6);  // exponential tails leave almost nothing
    CHECK_FALSE(r->threshold.has_value());
  }
  // delta/Delta statistics share the MLE; mu uses the MDE
  CHECK(d1.theta_hat == doctest::Approx(d2.theta_hat).epsilon(1e-12));
  CHECK(std::abs(d3.theta_hat - d1.theta_hat) < 0.5);
}

TEST_CASE("decide fills thresholds and uses a strict inequality") {
  const auto table = fake_table(LimitKind::delta);
  TestReport stat;
  stat.kind = StatKind::delta_lte;
  stat.model_ref = "ou";

  stat.value = 0.0;
  auto decided = decide(stat, table, 0.05);
  CHECK(decided.threshold == doctest::Approx(2.0));
  CHECK(decided.epsilon == doctest::Approx(0.05));
  CHECK_FALSE(*decided.reject);

  // statistic equal to the threshold is accepted
  stat.value = 2.0;
  CHECK_FALSE(*decide(stat, table, 0.05).reject);
  stat.value = 2.0 + 1e-12;
  CHECK(*decide(stat, table, 0.05).reject);

  // rejection is monotone in epsilon on the same statistic
  stat.value = 1.5;
  const bool at_01 = *decide(stat, table, 0.01).reject;
  const bool at_10 = *decide(stat, table, 0.10).reject;
  CHECK((!at_01 || at_10));
  CHECK(at_10);
}

TEST_CASE("decide validates table compatibility") {
  TestReport stat;
  stat.kind = StatKind::delta_lte;
  stat.model_ref = "ou";
  stat.value = 1.0;

  CHECK_THROWS_AS(decide(stat, fake_table(LimitKind::Delta), 0.05),
                  ConfigError);
  CHECK_THROWS_AS(decide(stat, fake_table(LimitKind::delta), 0.03),
                  ConfigError);
  auto other_model = fake_table(LimitKind::delta);
  other_model.model_ref = "cubic";
  CHECK_THROWS_AS(decide(stat, other_model, 0.05), ConfigError);

  TestReport ks;
  ks.kind = StatKind::ks_lte;
  CHECK_THROWS_AS(decide(ks, fake_table(LimitKind::delta), 0.05),
                  ConfigError);
}

TEST_CASE("statistics are stable under grid refinement") {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  const InvariantLaw fine(ou, law.grid().hi(), 0.5 * law.grid().h());
  const Path p =
      simulate_path(ou, 0.0, 200.0, 0.01, 5, InitRule::stationary(), &law);

  const double d_coarse = cvm_lte(p, ou, law).value;
  const double d_fine = cvm_lte(p, ou, fine).value;
  CHECK(std::abs(d_coarse - d_fine) / d_fine < 0.01);

  const double D_coarse = cvm_edf(p, ou, law).value;
  const double D_fine = cvm_edf(p, ou, fine).value;
  CHECK(std::abs(D_coarse - D_fine) / D_fine < 0.01);
}

TEST_CASE("Delta is invariant under a grid-aligned data shift") {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  const Path p =
      simulate_path(ou, 0.0, 200.0, 0.01, 21, InitRule::stationary(), &law);
  // a grid-aligned shift keeps the trapezoid sums aligned, so the whole
  // equivariance chain survives discretization
  const double c = 64.0 * law.grid().h();
  Path shifted = p;
  for (auto& x : shifted.values) x += c;

  const double base = cvm_edf(p, ou, law).value;
  const double moved = cvm_edf(shifted, ou, law).value;
  CHECK(std::abs(moved - base) < 1e-6 * (1.0 + base));
}

TEST_CASE("mu test holds its size and rejects a strong alternative") {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  const auto batch = simulate_limit(LimitKind::mu, law, 20000, 404, nullptr,
                                    2);
  const double eps[] = {0.05};
  const double k05 = estimate_quantiles(batch, eps).thresholds[0];

  std::size_t rejections = 0;
  const std::size_t reps = 150;
  for (std::uint64_t s = 0; s < reps; ++s) {
    const Path p = simulate_path(ou, 1.0, 200.0, 0.01, derive_seed(303, s),
                                 InitRule::stationary(), &law);
    if (cvm_kernel(p, ou, law).value > k05) ++rejections;
  }
  const double size = static_cast<double>(rejections) /
                      static_cast<double>(reps);
  CHECK(size >= 0.01);
  CHECK(size <= 0.12);

  const auto alt = [](double x) { return -2.0 * x; };
  const auto env = check_drift_envelope(alt);
  const double L = env.tail.A + std::max(20.0 / env.tail.gamma, 10.0);
  const InvariantLaw alt_law("alt", alt, nullptr, L, 1e-3 * L);
  std::size_t alt_rejections = 0;
  const std::size_t alt_reps = 60;
  for (std::uint64_t s = 0; s < alt_reps; ++s) {
    const Path p = alternative_path(alt, 200.0, 0.01, derive_seed(304, s),
                                    InitRule::stationary(), &alt_law);
    if (cvm_kernel(p, ou, law).value > k05) ++alt_rejections;
  }
  CHECK(static_cast<double>(alt_rejections) /
            static_cast<double>(alt_reps) >=
        0.9);
}

TEST_CASE("KS statistics are stable across seed batches") {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  std::vector<double> batch_a, batch_b;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Path p = simulate_path(ou, 0.5, 200.0, 0.01, derive_seed(201, s),
                                 InitRule::stationary(), &law);
    const auto [w, W] = ks_statistics(p, ou, law);
    CHECK(std::isfinite(w.value));
    CHECK(W.value >= 0.0);
    (s % 2 == 0 ? batch_a : batch_b).push_back(w.value);
  }
  const double med_a = test::median(batch_a);
  const double med_b = test::median(batch_b);
  CHECK(std::abs(med_a - med_b) / med_b < 0.2);
}
