#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "banknet/domain.hpp"
#include "banknet/returns.hpp"

namespace banknet::objective {

/// Smoothed limited-liability equity v(P) = log(exp(P)+1), evaluated in the
/// overflow-safe form max(P,0) + log1p(exp(-|P|)).
double softplus_equity(double position);

/// u(v(P)) with the recommended log utility. Strictly increasing and
/// strictly concave in P.
double utility_chain(double position);

enum class UtilityKind {
    log_softplus,   // u = log, v = softplus (the recommended chain)
    identity        // u o v = Id (risk-neutral diagnostics)
};

double chain_value(double position, UtilityKind kind);
/// d(u o v)/dP, the per-draw weight of the analytic gradient.
double chain_weight(double position, UtilityKind kind);

/// r_D(omega) = alpha - beta * exp(omega).
double yield_curve(double omega, const YieldCurveSpec& spec);

/// Throws std::invalid_argument unless beta > 0 and r_D stays strictly
/// above the risk-free rate on all of [0,1].
void validate_yield_curve(const YieldCurveSpec& spec, double risk_free_rate);

/// Cash floor k^L * exp(omega) * exp(L).
double liquidity_requirement(double omega, double debt, double weight_liquidity);

/// What the optimizing bank assumes about counterparty j: external balance
/// sheet, funding rate, scaling factor and time-0 market prices of its
/// claims. bank_index addresses the counterparty's column in a DrawMatrix.
struct Counterparty {
    int bank_index = 0;
    double kappa = 1.0;             // asset scaling factor, >= 1 when interconnected
    double external_assets = 0.0;   // Ax_j
    double cash = 0.0;              // Al_j
    double nominal_debt = 0.0;      // L*_j
    double debt_rate = 0.0;         // r_D,j
    double price_equity = 0.0;      // K_j^(0) market value
    double price_debt = 0.0;        // L_j^(0) market value

    double matured_debt() const { return nominal_debt * (1.0 + debt_rate); }
};

using CounterpartySnapshot = std::vector<Counterparty>;

/// The optimizing bank's own fixed data. The funding rate is either a
/// constant or read off a yield curve when the maturity control is live.
struct OwnParams {
    int bank_index = 0;
    double equity = 1.0;            // K^(0), exogenous endowment
    double risk_free_rate = 0.0;
    double debt_rate = 0.0;         // used when no curve is set
    std::optional<YieldCurveSpec> curve;

    double funding_rate(double omega) const {
        return curve ? yield_curve(omega, *curve) : debt_rate;
    }
};

/// Candidate balance-sheet composition. Debt is not a field: the budget
/// constraint pins L^(0) = Ax + Al + sum(pi*K) + sum(gamma*L) - K^(0), so
/// it is eliminated and recovered via implied_debt.
struct ControlVector {
    double external_assets = 0.0;
    double cash = 0.0;
    double maturity = 1.0;
    std::vector<double> shares;   // aligned with the snapshot order
    std::vector<double> debts;

    bool operator==(const ControlVector&) const = default;
};

double implied_debt(const ControlVector& ctrl, const CounterpartySnapshot& snap,
                    const OwnParams& own);

/// End-of-period position P^(1) for one realized gross-return vector
/// (indexed by bank_index columns).
double position(const ControlVector& ctrl, const CounterpartySnapshot& snap,
                const OwnParams& own, std::span<const double> gross_returns);

struct EuEstimate {
    double mean = 0.0;
    double se = 0.0;
};

/// Per-draw payoff columns that do not depend on the controls: own gross
/// return, counterparty equity payoffs (per unit pi) and debt payoffs (per
/// unit gamma). Lets the optimizer evaluate the Monte-Carlo objective and
/// its exact gradient as an affine pass over the draws.
class PositionTable {
public:
    PositionTable() = default;
    PositionTable(const CounterpartySnapshot& snap, const OwnParams& own,
                  const returns::DrawMatrix& draws);

    std::size_t draws() const { return n_draws_; }
    std::size_t counterparties() const { return m_; }

    double position_at(std::size_t k, const ControlVector& ctrl, double funding,
                       double debt) const;

    /// Deterministic fixed-partition mean of u(v(P)) over the draws.
    EuEstimate expected_utility(const ControlVector& ctrl, UtilityKind kind,
                                int threads = 1) const;

    /// EU plus the analytic gradient in the order
    /// [Ax, cash, omega, shares..., debts...].
    EuEstimate expected_utility_grad(const ControlVector& ctrl, UtilityKind kind,
                                     std::vector<double>& grad, int threads = 1) const;

    /// Mean and standard error of the per-draw derivative of u(v(P)) with
    /// respect to one share/debt holding (marginal attractiveness check).
    EuEstimate holding_gradient(const ControlVector& ctrl, UtilityKind kind,
                                std::size_t counterparty, bool share) const;

    const CounterpartySnapshot& snapshot() const { return snap_; }
    const OwnParams& own() const { return own_; }

private:
    std::size_t stride() const { return 1 + 2 * m_; }

    CounterpartySnapshot snap_;
    OwnParams own_;
    std::size_t n_draws_ = 0;
    std::size_t m_ = 0;
    std::vector<double> cols_;   // per draw: [G_own, S_0.., D_0..]
};

/// Monte-Carlo expected utility of the position under common random
/// numbers: deterministic given the draw matrix. Throws on a non-finite
/// utility naming the draw index.
EuEstimate expected_utility(const ControlVector& ctrl, const CounterpartySnapshot& snap,
                            const OwnParams& own, const returns::DrawMatrix& draws,
                            UtilityKind kind = UtilityKind::log_softplus, int threads = 1);

}  // namespace banknet::objective
