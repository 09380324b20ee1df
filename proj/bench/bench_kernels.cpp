// Serial reference against the OpenMP kernels for the two hot paths.

#include <benchmark/benchmark.h>

#include <numbers>

#include "fuzzytomo/montecarlo.hpp"

using namespace fuzzytomo;

namespace {

Execution execution(const benchmark::State& state) {
    return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_LossMap(benchmark::State& state) {
    const auto model = build_model(ModelKind::fuzzy, cube_protocol().configs, PlatePair{},
                                   spectral_grid(kReferenceLambda0Um, 0.01));
    GridSpec spec;
    spec.n_theta = 25;
    spec.n_phi = 50;
    for (auto _ : state) benchmark::DoNotOptimize(loss_map(model, spec, execution(state)));
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

void BM_RunComparison(benchmark::State& state) {
    const SimulationPlan plan{.true_state = bloch_to_state({std::numbers::pi / 2, 0.0, 0.0}),
                              .protocol = cube_protocol(),
                              .plates = PlatePair{},
                              .true_bandwidth_um = 0.01,
                              .n_tot_values = {1000, 100000},
                              .n_experiments = 200,
                              .seed = 7};
    for (auto _ : state) benchmark::DoNotOptimize(run_comparison(plan, execution(state)));
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

}  // namespace

BENCHMARK(BM_LossMap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunComparison)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
