#pragma once

#include <cstdint>
#include <vector>

#include "banknet/domain.hpp"

namespace banknet::welfare {

enum class WelfareVariant {
    formula,   // w_i = -c (L*(1) - L(1)) + Ax(1), unconditionally
    prose      // solvent banks contribute Ax(1), defaulted ones only the -c shortfall
};

struct WelfareReport {
    std::vector<double> contributions;   // per-bank mean w_i
    double welfare = 0.0;                // W, ratio
    double welfare_se = 0.0;
    double sum_contributions = 0.0;
    double sum_contributions_se = 0.0;
    double deposit_cost = 0.0;           // c
    std::size_t draws_used = 0;
    std::uint64_t seed = 0;
    std::size_t defaults_observed = 0;   // bank-draws in default
};

/// Simulates end-of-period shocks on a formed network, clears every draw
/// with the heuristic solver and averages the per-bank contributions
/// w_i = -c (L_i*(1) - L_i(1)) + Ax_i(1) into
/// W = sum(w_i) / sum(Ax_i(0)).
WelfareReport evaluate_welfare(const Network& net, const ReturnModel& model, double deposit_cost,
                               std::size_t n_draws, std::uint64_t seed,
                               WelfareVariant variant = WelfareVariant::formula, int threads = 1);

}  // namespace banknet::welfare
