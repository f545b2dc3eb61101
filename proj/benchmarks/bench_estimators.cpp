#include <benchmark/benchmark.h>

#include "cvmshift/estimators.hpp"
#include "cvmshift/gof.hpp"
#include "cvmshift/invariant_law.hpp"
#include "cvmshift/model.hpp"
#include "cvmshift/simulate.hpp"

namespace {

using namespace cvmshift;

struct Fixture {
  ShiftDriftModel model = make_model("ou");
  InvariantLaw law{model};
  Path path = simulate_path(model, 0.5, 200.0, 0.01, 7,
                            InitRule::stationary(), &law);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_MleShift(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(mle_shift(f.path, f.model).theta_hat);
  }
}
BENCHMARK(BM_MleShift);

void BM_LteDensity(benchmark::State& state) {
  const auto& f = fixture();
  const auto nodes = f.law.grid_nodes();
  for (auto _ : state) {
    const auto curve = lte_density(f.path, nodes);
    benchmark::DoNotOptimize(curve.values.data());
  }
}
BENCHMARK(BM_LteDensity);

void BM_CvmLte(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(cvm_lte(f.path, f.model, f.law).value);
  }
}
BENCHMARK(BM_CvmLte);

}  // namespace
