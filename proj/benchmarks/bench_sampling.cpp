#include <benchmark/benchmark.h>

#include "banknet/returns.hpp"

using namespace banknet;

static void BM_SampleGrossReturns(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    ReturnModel m;
    m.log_mean.assign(n, 0.0094);
    m.log_vol.assign(n, 0.0336);
    m.correlation = Matrix(n, n, -0.05);
    for (std::size_t i = 0; i < n; ++i) m.correlation(i, i) = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(returns::sample_gross_returns(m, 100000, 42));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 100000 *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SampleGrossReturns)->Arg(2)->Arg(4)->Arg(10);
