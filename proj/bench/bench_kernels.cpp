// OpenMP kernels against the serial reference on the same trees.
#include <benchmark/benchmark.h>

#include <cmath>

#include "moran/fixtures.hpp"
#include "moran/kernels.hpp"
#include "moran/parallel.hpp"

namespace {

using namespace moran;

const SystemSpec& random_pair() {
  static const SystemSpec spec = fixture("random_pair");
  return spec;
}

void cutset_reference(benchmark::State& state) {
  const TreeModel model(random_pair(), false);
  for (auto _ : state) {
    auto r = reference::cutset(model, 0.7, std::log(1e-9), 10'000'000, false);
    benchmark::DoNotOptimize(r.log_sum);
  }
}

void cutset_omp(benchmark::State& state) {
  set_thread_count(static_cast<int>(state.range(0)));
  const TreeModel model(random_pair(), false);
  for (auto _ : state) {
    auto r = omp_kernels::cutset(model, 0.7, std::log(1e-9), 10'000'000, false);
    benchmark::DoNotOptimize(r.log_sum);
  }
  set_thread_count(0);
}

void net_reference(benchmark::State& state) {
  const TreeModel model(random_pair(), false);
  for (auto _ : state) benchmark::DoNotOptimize(reference::net_measure(model, 1.3, 6, 16));
}

void net_omp(benchmark::State& state) {
  set_thread_count(static_cast<int>(state.range(0)));
  const TreeModel model(random_pair(), false);
  for (auto _ : state) benchmark::DoNotOptimize(omp_kernels::net_measure(model, 1.3, 6, 16));
  set_thread_count(0);
}

}  // namespace

BENCHMARK(cutset_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(cutset_omp)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(net_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(net_omp)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
