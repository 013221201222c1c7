#include "pdmforge/pct.hpp"
#include "pdmforge/vonroos.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_ConstructExponential(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const pdm::Grid1D grid(-10.0, 25.0, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pdm::construct_laguerre_exponential(1.0, 2.0, 3, grid));
    }
    state.SetItemsProcessed(static_cast<long long>(state.iterations() * n));
}
BENCHMARK(BM_ConstructExponential)->RangeMultiplier(4)->Range(1000, 64000)->Unit(benchmark::kMillisecond);

void BM_EigsLowest(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto k = static_cast<std::size_t>(state.range(1));
    const pdm::Grid1D grid(-8.0, 8.0, n);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = grid.x(i) * grid.x(i);
    const pdm::TridiagonalOperator T =
        pdm::discretize(pdm::MassProfile(pdm::constant_map(1.0, grid.interval())), v, grid);
    for (auto _ : state) benchmark::DoNotOptimize(pdm::eigs_lowest(T, k));
}
BENCHMARK(BM_EigsLowest)
    ->ArgsProduct({{2000, 8000, 32000}, {1, 4, 16}})
    ->Unit(benchmark::kMillisecond);

void BM_VerifySystem(benchmark::State& state) {
    const pdm::ConstructedSystem sys =
        pdm::construct_laguerre_exponential(1.0, 2.0, 3, pdm::default_exponential_grid(1.0));
    for (auto _ : state) benchmark::DoNotOptimize(pdm::verify_system(sys, 4));
}
BENCHMARK(BM_VerifySystem)->Unit(benchmark::kMillisecond);

void BM_ApplyDeltaQ(benchmark::State& state) {
    const pdm::ConstructedSystem sys =
        pdm::construct_laguerre_exponential(1.0, 2.0, 0, pdm::default_exponential_grid(1.0));
    const pdm::DeltaQ dq = pdm::delta_q_linear(0.1);
    for (auto _ : state) benchmark::DoNotOptimize(pdm::apply_deltaQ(sys, 0, dq));
}
BENCHMARK(BM_ApplyDeltaQ)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
