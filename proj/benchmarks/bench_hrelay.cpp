#include <benchmark/benchmark.h>

#include "hrelay/analytics.hpp"
#include "hrelay/fredholm.hpp"
#include "hrelay/qdist.hpp"
#include "hrelay/sampler.hpp"
#include "hrelay/simulator.hpp"

using namespace hrelay;

namespace {

KernelSpec two_receiver_kernel(double alpha) {
  return {2e-3, Repulsion::ginibre(alpha), 500.0,
          Modulation::pathloss({{279.5, {0, 0}, 3.5}, {419.0, {5, 0}, 3.5}})};
}

void BM_FredholmNystrom(benchmark::State& state) {
  const auto k = two_receiver_kernel(-0.5);
  for (auto _ : state) benchmark::DoNotOptimize(fredholm_log_det(k));
}
BENCHMARK(BM_FredholmNystrom)->Unit(benchmark::kMillisecond);

void BM_FredholmRadial(benchmark::State& state) {
  const KernelSpec k{2e-3, Repulsion::ginibre(-0.5), 500.0, Modulation::pathloss({{279.5, {0, 0}, 3.5}})};
  for (auto _ : state) benchmark::DoNotOptimize(radial_fredholm_log_det(k));
}
BENCHMARK(BM_FredholmRadial)->Unit(benchmark::kMicrosecond);

void BM_QDistribution(benchmark::State& state) {
  const SystemConfig c;
  for (auto _ : state) benchmark::DoNotOptimize(q_distribution(c).q.size());
}
BENCHMARK(BM_QDistribution)->Unit(benchmark::kMillisecond);

// Engine on warm shared tables: the per-configuration cost seen by sweeps.
void BM_AnalyticEngineWarm(benchmark::State& state) {
  SystemConfig c;
  AnalyticEngine(c).success_esap();
  for (auto _ : state) {
    c.source_power = c.source_power == 0.1 ? 0.11 : 0.1;
    benchmark::DoNotOptimize(AnalyticEngine(c).capacity_esap().value);
  }
}
BENCHMARK(BM_AnalyticEngineWarm)->Unit(benchmark::kMillisecond);

void BM_SampleGinibreField(benchmark::State& state) {
  SamplerSpec s;
  s.window_radius = 60.0;
  s.exact_modes = static_cast<int>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) {
    s.seed = ++i;
    benchmark::DoNotOptimize(sample_field(s).points.size());
  }
}
BENCHMARK(BM_SampleGinibreField)->Arg(0)->Arg(24)->Arg(62)->Unit(benchmark::kMicrosecond);

void BM_SimulatedSlot(benchmark::State& state) {
  SimulationPlan plan;
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_slot(plan, ++i).success);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_SimulatedSlot)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
