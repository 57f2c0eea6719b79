// Serial reference versus OpenMP kernels. Set OMP_NUM_THREADS to vary the
// worker count; on one core the two should be within noise of each other.

#include <benchmark/benchmark.h>

#include "srnis/ansatz.hpp"
#include "srnis/ensemble.hpp"
#include "srnis/learning.hpp"

using namespace srnis;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial_reference : Execution::parallel;
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial_reference" : "parallel"); }

void BM_Ensemble(benchmark::State& state) {
  const Model m = catalog("michaelis-menten");
  const auto grid = TimeGrid::from_step_size(1.0, 1.0 / 16);
  const AnsatzParams p = initial_ansatz(m.network, m.observable, 2.0);
  const AnsatzPolicy policy(m.network, p, grid);
  EnsembleOptions opts;
  opts.execution = mode(state);
  const auto paths = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    auto r = sample_ensemble(m.network, grid, m.observable, &policy, paths, 7, opts);
    benchmark::DoNotOptimize(r.weighted.mean());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
  label(state);
}

void BM_Gradient(benchmark::State& state) {
  const Model m = catalog("futile-cycle");
  const auto grid = TimeGrid::from_step_size(m.network.final_time(), 1.0 / 16);
  const AnsatzParams p = initial_ansatz(m.network, m.observable, 2.0);
  const auto paths = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    auto g = estimate_gradient(m.network, grid, m.observable, p, paths, 7, mode(state));
    benchmark::DoNotOptimize(g.gradient.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
  label(state);
}

}  // namespace

BENCHMARK(BM_Ensemble)->ArgsProduct({{0, 1}, {20000}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gradient)->ArgsProduct({{0, 1}, {20000}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
