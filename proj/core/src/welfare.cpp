#include "banknet/welfare.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "banknet/clearing.hpp"
#include "banknet/returns.hpp"

namespace banknet::welfare {

WelfareReport evaluate_welfare(const Network& net, const ReturnModel& model, double deposit_cost,
                               std::size_t n_draws, std::uint64_t seed, WelfareVariant variant,
                               int threads) {
    const std::size_t n = net.size();
    if (model.size() != n) throw std::invalid_argument("evaluate_welfare: model size mismatch");
    if (!(deposit_cost >= 0.0 && deposit_cost <= 0.6))
        throw std::invalid_argument("evaluate_welfare: deposit cost outside [0, 0.6]");
    if (n_draws == 0) throw std::invalid_argument("evaluate_welfare: n_draws must be >= 1");
    {
        const auto violations = validate_network(net);
        if (!violations.empty())
            throw std::invalid_argument("evaluate_welfare: invalid network: " +
                                        to_string(violations.front()));
    }
    double initial_lending = 0.0;
    for (std::size_t i = 0; i < n; ++i) initial_lending += net.at(i).external_assets;
    if (!(initial_lending > 0.0))
        throw std::invalid_argument("evaluate_welfare: zero initial external assets");

    const returns::DrawMatrix draws = returns::sample_gross_returns(model, n_draws, seed);

    constexpr std::size_t kBlock = 4096;
    const std::size_t n_blocks = (n_draws + kBlock - 1) / kBlock;

    struct BlockOut {
        double sum_w = 0.0;
        double sum_w_sq = 0.0;
        std::vector<double> sum_contrib;
        std::size_t defaults = 0;
        std::ptrdiff_t failed_draw = -1;
        std::string message;
    };
    std::vector<BlockOut> parts(n_blocks);

    auto run_block = [&](std::size_t blk) {
        BlockOut out;
        out.sum_contrib.assign(n, 0.0);
        std::vector<double> g(n);
        const std::size_t lo = blk * kBlock;
        const std::size_t hi = std::min(lo + kBlock, n_draws);
        for (std::size_t k = lo; k < hi; ++k) {
            for (std::size_t i = 0; i < n; ++i) g[i] = draws(k, i);
            clearing::RealizedNetwork rnet = clearing::realize(net, g);
            ClearingResult cr;
            try {
                cr = clearing::clear_heuristic(rnet);
            } catch (const std::exception& e) {
                out.failed_draw = static_cast<std::ptrdiff_t>(k);
                out.message = e.what();
                return out;
            }
            double w_total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const Institution& b = net.at(i);
                const double ax1 = b.external_assets * g[i];
                const double shortfall =
                    b.nominal_debt * (1.0 + b.debt_rate) - cr.debt_value[i];
                const bool defaulted = cr.regime[i] == Regime::defaulted;
                if (defaulted) ++out.defaults;
                double wi;
                if (variant == WelfareVariant::formula) {
                    wi = -deposit_cost * shortfall + ax1;
                } else {
                    wi = defaulted ? -deposit_cost * shortfall : ax1;
                }
                out.sum_contrib[i] += wi;
                w_total += wi;
            }
            const double w_ratio = w_total / initial_lending;
            out.sum_w += w_ratio;
            out.sum_w_sq += w_ratio * w_ratio;
        }
        return out;
    };

    if (threads <= 1 || n_blocks <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) parts[b] = run_block(b);
    } else {
        const int workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n_blocks);
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t b = static_cast<std::size_t>(t); b < n_blocks;
                     b += static_cast<std::size_t>(workers))
                    parts[b] = run_block(b);
            });
        }
        for (auto& th : pool) th.join();
    }

    WelfareReport rep;
    rep.contributions.assign(n, 0.0);
    rep.deposit_cost = deposit_cost;
    rep.draws_used = n_draws;
    rep.seed = seed;
    double sum_w = 0.0, sum_w_sq = 0.0;
    for (const BlockOut& p : parts) {
        if (p.failed_draw >= 0)
            throw std::runtime_error("evaluate_welfare: clearing failed at draw " +
                                     std::to_string(p.failed_draw) + ": " + p.message);
        sum_w += p.sum_w;
        sum_w_sq += p.sum_w_sq;
        rep.defaults_observed += p.defaults;
        for (std::size_t i = 0; i < n; ++i) rep.contributions[i] += p.sum_contrib[i];
    }
    const double nd = static_cast<double>(n_draws);
    for (std::size_t i = 0; i < n; ++i) {
        rep.contributions[i] /= nd;
        rep.sum_contributions += rep.contributions[i];
    }
    rep.welfare = sum_w / nd;
    const double var =
        std::max(0.0, (sum_w_sq - nd * rep.welfare * rep.welfare) / std::max(1.0, nd - 1.0));
    rep.welfare_se = std::sqrt(var / nd);
    rep.sum_contributions_se = rep.welfare_se * initial_lending;
    return rep;
}

}  // namespace banknet::welfare
