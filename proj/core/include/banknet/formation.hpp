#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "banknet/domain.hpp"
#include "banknet/objective.hpp"
#include "banknet/optimizer.hpp"
#include "banknet/returns.hpp"

namespace banknet::formation {

/// Exogenous data of one bank entering the game.
struct BankSetup {
    double equity = 1.0;
    double debt_rate = 0.0;
    double maturity = 1.0;
    double cash = 0.0;
    returns::CalibrationTarget calibration;
    std::optional<double> log_mean_override;
    std::optional<double> log_vol_override;
};

enum class KappaMode {
    one,      // kappa_j = 1 (the stable choice the simulations use)
    general   // kappa_j = (L_j + K_j) / (Ax_j + Al_j)
};

struct FormationConfig {
    RegulatoryPolicy policy;
    Matrix correlation;
    double risk_free_rate = 0.0;
    std::size_t draw_count = 100000;
    std::uint64_t seed = 0;
    int max_rounds = 20;        // full round-robin passes
    double conv_tol = 0.01;     // relative change threshold per control
    KappaMode kappa = KappaMode::one;
    std::vector<int> order;     // optimization order; empty = 0..n-1
    bool free_cash = false;
    bool free_maturity = false;
    int multi_start = 8;
    double tol_obj = 1e-7;
    double tol_feas = 1e-9;
    int threads = 1;
};

/// One bank optimization within the game, for audit.
struct StepRecord {
    int round = 0;            // 1-based full pass
    int step = 0;             // 1-based optimization counter
    int bank = 0;             // 0-based
    objective::ControlVector control;   // shares/debts as full n-vectors
    double implied_debt = 0.0;
    double eu = 0.0;
    double max_rel_change = 0.0;        // vs this bank's previous optimization
    std::vector<double> price_equity;   // counterparty prices used (full n, self 0)
    std::vector<double> price_debt;
};

struct FormationResult {
    Network network;
    std::vector<StepRecord> trajectory;
    int rounds = 0;
    bool converged = false;
    std::vector<double> log_mean;      // per-bank calibration used
    std::vector<double> log_vol;
    std::vector<double> bc_residual;   // |(BC) at final prices| per bank
};

class FormationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative game: banks re-optimize round-robin against the
/// latest published balance sheets until every control variable of every
/// bank moves less than conv_tol (relative, with a 1e-8 absolute floor on
/// the change) between its consecutive optimizations.
FormationResult form_network(const std::vector<BankSetup>& banks, const FormationConfig& cfg);

}  // namespace banknet::formation
