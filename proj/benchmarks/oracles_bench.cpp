#include <benchmark/benchmark.h>

#include "halp/bench.hpp"
#include "halp/costnet.hpp"
#include "halp/halp.hpp"
#include "halp/oracles.hpp"

using namespace halp;

namespace {

constexpr double kGamma = 0.95;

LinearValueFunction random_weights(const Benchmark& b, std::uint64_t seed) {
    Rng rng(seed);
    LinearValueFunction v{b.basis, {}};
    for (std::size_t i = 0; i < b.basis.size(); ++i) v.weights.push_back(20.0 * rng.uniform() - 10.0);
    return v;
}

void BM_ViolationTables(benchmark::State& state) {
    const auto b = make_ring_admin(4);
    const auto grid = make_eps_grid(b.mdp, 1.0 / static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(ViolationTables(b.basis, b.mdp, kGamma, grid));
}
BENCHMARK(BM_ViolationTables)->Arg(4)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_MostViolatedOnGrid(benchmark::State& state) {
    const auto b = make_ring_admin(4);
    const ViolationTables tables(b.basis, b.mdp, kGamma, make_eps_grid(b.mdp, 1.0 / static_cast<double>(state.range(0))));
    const auto v = random_weights(b, 1);
    for (auto _ : state) benchmark::DoNotOptimize(most_violated_on_grid(tables, v.weights));
}
BENCHMARK(BM_MostViolatedOnGrid)->Arg(4)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_OracleMc(benchmark::State& state) {
    const auto b = make_irrigation(IrrigationRing{6});
    const auto v = random_weights(b, 2);
    Rng rng(3);
    for (auto _ : state) benchmark::DoNotOptimize(oracle_mc({static_cast<std::size_t>(state.range(0))}, v, b.mdp, kGamma, rng));
}
BENCHMARK(BM_OracleMc)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_McmcChain(benchmark::State& state) {
    const auto b = make_irrigation(IrrigationRing{6});
    const auto v = random_weights(b, 4);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_mcmc({1, static_cast<int>(state.range(0)), 0.2, 10}, v, b.mdp, kGamma, ++seed));
}
BENCHMARK(BM_McmcChain)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_EpsHalpRing4(benchmark::State& state) {
    const auto b = make_ring_admin(4);
    const auto psi = StateRelevanceDensity::uniform(b.mdp);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cutting_plane(b.mdp, b.basis, psi, kGamma, OracleConfig{EpsConfig{0.125, {}}}, 0));
    }
}
BENCHMARK(BM_EpsHalpRing4)->Unit(benchmark::kMillisecond);

}  // namespace
