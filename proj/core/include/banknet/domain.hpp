#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "banknet/linalg.hpp"

namespace banknet {

/// One bank's balance sheet at the initial date. Monetary fields are
/// currency units, maturity is the maturity-transformation degree in [0,1],
/// holding rows are fractions of the counterparty's equity/debt.
///
/// shares_held/debt_held are views of the network matrices: Network's
/// constructor copies row i of the matrices in, so the matrices stay the
/// single source of truth.
struct Institution {
    int id = 0;                        // 0-based internally, 1-based in reports
    double external_assets = 0.0;      // Ax
    double cash = 0.0;                 // Al
    double nominal_debt = 0.0;         // L*
    double equity_book = 0.0;          // K
    double maturity = 1.0;             // omega
    double debt_rate = 0.0;            // r_D charged on this bank's debt
    std::vector<double> shares_held;   // pi row
    std::vector<double> debt_held;     // gamma row

    double total_book_assets() const { return external_assets + cash; }

    bool operator==(const Institution&) const = default;
};

/// Regulatory weight set: solvency risk weights, the liquidity weight and
/// the floating-share caps. weight_external and the cap vectors are per
/// institution; the interfinancial weights are sector-wide.
struct RegulatoryPolicy {
    std::vector<double> weight_external;          // k^A_i
    double weight_shares = 0.232;                 // k^pi
    double weight_debt = 0.04;                    // k^gamma
    double weight_liquidity = 0.1;                // k^L
    std::vector<double> float_cap_shares;         // 1 - c^pi_j
    std::vector<double> float_cap_debt;           // 1 - c^gamma_j
    std::optional<double> large_exposure_limit;   // fraction of own equity; disabled by default

    static RegulatoryPolicy uniform(std::size_t n, double k_ext, double k_pi, double k_gamma,
                                    double k_liq = 0.1, double cap_pi = 1.0, double cap_gamma = 1.0) {
        RegulatoryPolicy p;
        p.weight_external.assign(n, k_ext);
        p.weight_shares = k_pi;
        p.weight_debt = k_gamma;
        p.weight_liquidity = k_liq;
        p.float_cap_shares.assign(n, cap_pi);
        p.float_cap_debt.assign(n, cap_gamma);
        return p;
    }

    bool operator==(const RegulatoryPolicy&) const = default;
};

/// Multivariate lognormal gross-return law of the external assets.
struct ReturnModel {
    std::vector<double> log_mean;   // mu
    std::vector<double> log_vol;    // sigma
    Matrix correlation;             // rho, unit diagonal, PSD

    std::size_t size() const { return log_mean.size(); }

    bool operator==(const ReturnModel&) const = default;
};

/// Funding curve r_D(omega) = alpha - beta * exp(omega).
struct YieldCurveSpec {
    double alpha = 0.0;
    double beta = 0.0;

    bool operator==(const YieldCurveSpec&) const = default;
};

enum class Regime { solvent, defaulted };

enum class ClearingMethod { heuristic, brute_force, fixed_point };

/// Liquidation equilibrium output: end-of-period equity and debt values,
/// the solvency regime they sit in and how they were computed.
struct ClearingResult {
    std::vector<double> equity;       // K, >= 0
    std::vector<double> debt_value;   // L in [0, L*(1+r_D)]
    std::vector<Regime> regime;       // d
    ClearingMethod method = ClearingMethod::brute_force;
    double residual = 0.0;            // max equation residual
    int regimes_tested = 0;           // exploration effort (heuristic/brute force)
    int iterations = 0;               // fixed-point effort
};

/// Institutions plus holding matrices. Matrices are the source of truth;
/// institution rows are filled in from them at construction. Immutable
/// after construction and safe to share across workers.
class Network {
public:
    Network() = default;
    Network(std::vector<Institution> institutions, Matrix share_matrix, Matrix debt_matrix,
            double risk_free_rate);

    std::size_t size() const { return institutions_.size(); }
    const std::vector<Institution>& institutions() const { return institutions_; }
    const Institution& at(std::size_t i) const { return institutions_.at(i); }
    const Matrix& share_matrix() const { return share_matrix_; }
    const Matrix& debt_matrix() const { return debt_matrix_; }
    double risk_free_rate() const { return risk_free_rate_; }

    bool operator==(const Network&) const = default;

private:
    std::vector<Institution> institutions_;
    Matrix share_matrix_;
    Matrix debt_matrix_;
    double risk_free_rate_ = 0.0;
};

/// One broken invariant found by validate_network.
struct Violation {
    std::string condition;   // e.g. "(A3')"
    int index = -1;          // institution or matrix column, 0-based; -1 when global
    std::string message;
};

/// Checks the equilibrium admissibility conditions (A1')-(A3') plus the domain
/// invariants. Reporting only: an empty list means the network is valid.
std::vector<Violation> validate_network(const Network& net);

std::string to_string(const Violation& v);

}  // namespace banknet
