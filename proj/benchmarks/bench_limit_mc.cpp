#include <benchmark/benchmark.h>

#include "cvmshift/invariant_law.hpp"
#include "cvmshift/limit_mc.hpp"
#include "cvmshift/model.hpp"

namespace {

using namespace cvmshift;

void BM_SimulateLimit(benchmark::State& state) {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto batch =
        simulate_limit(LimitKind::delta, law, n, seed++, nullptr, 1);
    benchmark::DoNotOptimize(batch.samples.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SimulateLimit)->Arg(100)->Arg(1000);

void BM_MdeLimitVariance(benchmark::State& state) {
  const auto ou = make_model("ou");
  const InvariantLaw law(ou);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mde_limit_variance(law));
  }
}
BENCHMARK(BM_MdeLimitVariance);

}  // namespace
