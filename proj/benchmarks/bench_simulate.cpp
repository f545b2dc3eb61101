#include <benchmark/benchmark.h>

#include "cvmshift/invariant_law.hpp"
#include "cvmshift/model.hpp"
#include "cvmshift/simulate.hpp"

namespace {

using namespace cvmshift;

void BM_SimulatePath(benchmark::State& state) {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  const double T = static_cast<double>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const Path p = simulate_path(ou, 0.5, T, 0.01, seed++,
                                 InitRule::stationary(), &law);
    benchmark::DoNotOptimize(p.values.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(T / 0.01));
}
BENCHMARK(BM_SimulatePath)->Arg(100)->Arg(200);

void BM_BuildLaw(benchmark::State& state) {
  const auto ou = make_model("ou");
  for (auto _ : state) {
    const InvariantLaw law(ou);
    benchmark::DoNotOptimize(law.fisher());
  }
}
BENCHMARK(BM_BuildLaw);

}  // namespace

BENCHMARK_MAIN();
