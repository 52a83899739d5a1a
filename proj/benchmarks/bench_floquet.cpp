#include <benchmark/benchmark.h>

#include "floq/example_registry.hpp"
#include "floq/floquet.hpp"
#include "floq/spectral.hpp"

namespace {

floq::CanonicalSystem example(const char* name) {
  const auto& e = floq::find_example(name);
  return e.build(floq::resolve_params(e, {}));
}

void BM_Monodromy(benchmark::State& state) {
  const floq::PeriodLayout layout(example("dirac-comb-scalar-weight"));
  double l = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(floq::monodromy(layout, l));
    l += 1e-3;
  }
}
BENCHMARK(BM_Monodromy);

void BM_TMatrix(benchmark::State& state) {
  const floq::PeriodLayout layout(example("schrodinger-free"));
  for (auto _ : state) benchmark::DoNotOptimize(floq::t_matrix(layout, 12.5));
}
BENCHMARK(BM_TMatrix);

void BM_Bands(benchmark::State& state) {
  const auto sys = example("dirac-comb-full");
  floq::BandOptions opts;
  opts.grid_n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(floq::stability_bands(sys, -50, 50, opts));
}
BENCHMARK(BM_Bands)->Arg(201)->Arg(2001)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
