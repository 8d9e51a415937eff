#include <benchmark/benchmark.h>

#include "halp/special_fn.hpp"

using namespace halp;

namespace {

const BetaParams kP{15.0, 8.0};

void BM_BetaCdf(benchmark::State& state) {
    double u = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(beta_cdf(u, kP));
        u = u < 0.9 ? u + 0.01 : 0.1;
    }
}
BENCHMARK(BM_BetaCdf);

void BM_ExpectMonomial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(expect_monomial(kP, n, n / 2));
}
BENCHMARK(BM_ExpectMonomial)->Arg(1)->Arg(4)->Arg(16)->Arg(64);

void BM_ExpectBetaPdf(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(expect_beta_pdf(kP, {2.0, 6.0}));
}
BENCHMARK(BM_ExpectBetaPdf);

void BM_ExpectPwl(benchmark::State& state) {
    // hats over n equal cells
    const int n = static_cast<int>(state.range(0));
    PwlSegments f;
    for (int k = 0; k < n; ++k) {
        const double l = double(k) / n, r = double(k + 1) / n;
        f.push_back({l, r, 1.0 / (r - l), -l / (r - l)});
    }
    for (auto _ : state) benchmark::DoNotOptimize(expect_pwl(kP, f));
    state.SetComplexityN(n);
}
BENCHMARK(BM_ExpectPwl)->RangeMultiplier(4)->Range(1, 256)->Complexity();

}  // namespace

BENCHMARK_MAIN();
