#include <benchmark/benchmark.h>

#include <random>

#include "banknet/clearing.hpp"
#include "oracles.hpp"

using namespace banknet;

namespace {

struct Instance {
    Network net;
    std::vector<double> shocks;
};

Instance make_instance(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Instance inst{oracles::random_network(rng, n, 0.4), {}};
    std::lognormal_distribution<double> shock(-0.05, 0.2);
    inst.shocks.resize(n);
    for (auto& g : inst.shocks) g = shock(rng);
    return inst;
}

}  // namespace

static void BM_ClearHeuristic(benchmark::State& state) {
    const auto inst = make_instance(static_cast<std::size_t>(state.range(0)), 7);
    const auto rnet = clearing::realize(inst.net, inst.shocks);
    for (auto _ : state) {
        benchmark::DoNotOptimize(clearing::clear_heuristic(rnet));
    }
}
BENCHMARK(BM_ClearHeuristic)->Arg(2)->Arg(4)->Arg(8)->Arg(12);

static void BM_ClearBruteForce(benchmark::State& state) {
    const auto inst = make_instance(static_cast<std::size_t>(state.range(0)), 7);
    const auto rnet = clearing::realize(inst.net, inst.shocks);
    for (auto _ : state) {
        benchmark::DoNotOptimize(clearing::clear_bruteforce(rnet));
    }
}
BENCHMARK(BM_ClearBruteForce)->Arg(2)->Arg(4)->Arg(8)->Arg(12);

static void BM_ClearFixedPoint(benchmark::State& state) {
    const auto inst = make_instance(static_cast<std::size_t>(state.range(0)), 7);
    const auto rnet = clearing::realize(inst.net, inst.shocks);
    for (auto _ : state) {
        benchmark::DoNotOptimize(clearing::clear_fixed_point(rnet));
    }
}
BENCHMARK(BM_ClearFixedPoint)->Arg(2)->Arg(8)->Arg(12);
