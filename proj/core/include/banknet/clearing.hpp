#pragma once

#include <cstdint>
#include <vector>

#include "banknet/domain.hpp"

namespace banknet::clearing {

/// A network together with realized end-of-period external asset values
/// (cash already grown at the risk-free rate and folded in). Nominal debts
/// are maturity-adjusted to L*(1+r_D) before clearing.
struct RealizedNetwork {
    const Network* net = nullptr;
    std::vector<double> asset_value;   // Ax_i^(1) + Al_i^(1), per institution

    std::size_t size() const { return asset_value.size(); }
};

RealizedNetwork realize(const Network& net, const std::vector<double>& gross_returns);

/// Enumerates solvency regimes, solves the within-regime linear system and
/// returns the unique sign-consistent solution of the liquidation
/// equations. Exponential in n; the reference oracle.
ClearingResult clear_bruteforce(const RealizedNetwork& rnet, double tol = 1e-9);

/// Score-guided regime search: start from d_i = sign(w_i) with
/// w_i = (assets_i - L*_i)/L*_i, explore in descending score order and
/// never flip an institution with positive weight into default. Falls back
/// to the fixed point if the candidate set is exhausted.
ClearingResult clear_heuristic(const RealizedNetwork& rnet, double tol = 1e-9);

/// Picard iteration of (K, L) <- q(K, L) from the all-solvent start.
/// Contracts in the 1-norm at rate max column sum under (A3').
ClearingResult clear_fixed_point(const RealizedNetwork& rnet, int max_iter = 200000,
                                 double tol = 1e-12);

/// Max absolute residual of the liquidation equations at (K, L).
double clearing_residual(const RealizedNetwork& rnet, const std::vector<double>& equity,
                         const std::vector<double>& debt_value);

}  // namespace banknet::clearing
