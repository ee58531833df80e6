// Throughput comparison between the serial reference trial loop and the
// OpenMP chunked path, plus the bare estimator kernel.

#include <benchmark/benchmark.h>

#include "tvqe/montecarlo.hpp"
#include "tvqe/sequential_rotation.hpp"

namespace {

tvqe::ScenarioConfig bench_scenario(std::uint64_t trials) {
    tvqe::ScenarioConfig cfg;
    cfg.true_quaternion = tvqe::normalize(tvqe::Quat4{{0.3, -0.4, 0.5}, 0.7});
    cfg.r1 = tvqe::normalized({1.0, 0.2, -0.1});
    cfg.r2 = tvqe::normalized({-0.2, 1.0, 0.4});
    cfg.noise = tvqe::NoiseModel::tangent_plane(1e-2);
    cfg.trials = trials;
    cfg.seed = 42;
    return cfg;
}

void BM_estimate_kernel(benchmark::State& state) {
    const tvqe::ScenarioConfig cfg = bench_scenario(1);
    const tvqe::UnitQuaternion q = cfg.resolved_true_quaternion();
    const tvqe::VectorObservation vm1{tvqe::rotate(q, cfg.r1), cfg.r1};
    const tvqe::VectorObservation vm2{tvqe::rotate(q, cfg.r2), cfg.r2};
    for (auto _ : state) {
        benchmark::DoNotOptimize(tvqe::estimate(vm1, vm2));
    }
}
BENCHMARK(BM_estimate_kernel);

void BM_run_trials_serial(benchmark::State& state) {
    const tvqe::ScenarioConfig cfg = bench_scenario(std::uint64_t(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(tvqe::run_trials_serial(cfg));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_run_trials_serial)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

void BM_run_trials_parallel(benchmark::State& state) {
    const tvqe::ScenarioConfig cfg = bench_scenario(std::uint64_t(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(tvqe::run_trials(cfg, 0));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_run_trials_parallel)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
