#include <benchmark/benchmark.h>

#include "banknet/objective.hpp"
#include "banknet/returns.hpp"

using namespace banknet;

namespace {

struct Setup {
    objective::OwnParams own;
    objective::CounterpartySnapshot snap;
    objective::ControlVector ctrl;
    returns::DrawMatrix draws;
    objective::PositionTable table;

    Setup() {
        ReturnModel m;
        m.log_mean = {0.0094, 0.0094};
        m.log_vol = {0.0336, 0.0336};
        m.correlation = Matrix(2, 2);
        m.correlation(0, 0) = m.correlation(1, 1) = 1.0;
        m.correlation(0, 1) = m.correlation(1, 0) = -0.9;
        draws = returns::sample_gross_returns(m, 100000, 1);

        objective::Counterparty c;
        c.bank_index = 0;
        c.external_assets = 10.0;
        c.nominal_debt = 9.0;
        c.price_equity = 1.1;
        c.price_debt = 9.0;
        snap = {c};
        own.bank_index = 1;
        own.equity = 1.0;
        ctrl.external_assets = 14.5;
        ctrl.shares = {0.45};
        ctrl.debts = {0.0};
        table = objective::PositionTable(snap, own, draws);
    }
};

}  // namespace

static void BM_ExpectedUtility(benchmark::State& state) {
    static const Setup s;
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            s.table.expected_utility(s.ctrl, objective::UtilityKind::log_softplus, threads));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 100000);
}
BENCHMARK(BM_ExpectedUtility)->Arg(1)->Arg(4)->Arg(8);

static void BM_ExpectedUtilityGrad(benchmark::State& state) {
    static const Setup s;
    std::vector<double> grad;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            s.table.expected_utility_grad(s.ctrl, objective::UtilityKind::log_softplus, grad));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 100000);
}
BENCHMARK(BM_ExpectedUtilityGrad);

static void BM_BuildPositionTable(benchmark::State& state) {
    static const Setup s;
    for (auto _ : state) {
        benchmark::DoNotOptimize(objective::PositionTable(s.snap, s.own, s.draws));
    }
}
BENCHMARK(BM_BuildPositionTable);
