#pragma once

#include <cstdint>
#include <optional>

#include "banknet/domain.hpp"
#include "banknet/objective.hpp"

namespace banknet::pricing {

/// Time-0 values of one institution's total equity and debt.
struct ClaimPrices {
    double market_equity = 0.0;     // K^(0)
    double market_debt = 0.0;       // L^(0)
    double expected_equity = 0.0;   // E0[K^(1)]
    double expected_debt = 0.0;     // E0[L^(1)]
    double scaling = 1.0;           // kappa
};

/// Lognormal split of scaled assets against a strike:
/// first = E[max(scale*G - strike, 0)], second = E[min(scale*G, strike)],
/// G = exp(mu + sigma*Z). Degenerate corners (zero scale, non-positive
/// strike, sigma -> 0) take their limit values instead of evaluating
/// log(0).
struct ClaimSplit {
    double call = 0.0;
    double floor = 0.0;
};
ClaimSplit lognormal_claim_split(double scale, double strike, double log_mean, double log_vol);

/// Expected end-of-period equity and debt of an institution whose asset
/// side is its (kappa-scaled) external asset: the closed forms
///   E0[K] = kappa*Ax*e^{mu+s^2/2}*[1-Phi(u-s)] - L*(1)[1-Phi(u)]
///   E0[L] = kappa*Ax*e^{mu+s^2/2}*Phi(u-s)     + L*(1)[1-Phi(u)]
/// with u = (log(L*(1)/(kappa*Ax)) - mu)/s and L*(1) = L*(1+r_D).
/// They conserve E0[K] + E0[L] = kappa*Ax*e^{mu+s^2/2}.
std::pair<double, double> expected_claims(const Institution& inst, double log_mean,
                                          double log_vol, double kappa);

/// Discounted expected payoffs under the physical probability.
ClaimPrices market_values(const Institution& inst, double log_mean, double log_vol,
                          double kappa, double risk_free_rate);

/// Issuer-side parameters for the risk-neutral attractiveness checks.
/// Unlike expected_claims, the cash position enters through a shifted
/// strike: the equity is a call on the scaled external asset.
struct IssuerParams {
    double kappa = 1.0;
    double external_assets = 0.0;
    double cash = 0.0;
    double nominal_debt = 0.0;
    double debt_rate = 0.0;
    double log_mean = 0.0;
    double log_vol = 0.0;
};

struct AttractiveCheck {
    bool attractive = false;
    double margin = 0.0;   // expected payoff minus funding-grossed price
    double price = 0.0;    // the price the margin was computed against
};

/// True iff E0[K_j^(1)] > (1+r_D(omega_i)) * K_j^(0). The price defaults to
/// the fair physical-probability value and may be overridden.
AttractiveCheck share_attractive_rn(const IssuerParams& issuer, double holder_funding_rate,
                                    double risk_free_rate,
                                    std::optional<double> price_override = std::nullopt);

/// Debt-side twin: E0[L_j^(1)] > (1+r_D(omega_i)) * L_j^(0).
AttractiveCheck debt_attractive_rn(const IssuerParams& issuer, double holder_funding_rate,
                                   double risk_free_rate,
                                   std::optional<double> price_override = std::nullopt);

/// The optimizing bank's current candidate point, for the general
/// (risk-averse) marginal check.
struct HolderContext {
    objective::ControlVector ctrl;
    objective::CounterpartySnapshot snapshot;
    objective::OwnParams own;
    objective::UtilityKind utility = objective::UtilityKind::log_softplus;
    double cap_share = 1.0;
    double cap_debt = 1.0;
};

struct AttractivenessReport {
    double share_margin = 0.0;
    double share_se = 0.0;
    double debt_margin = 0.0;
    double debt_se = 0.0;
    bool share_capped = false;   // positive margin but the holding sits at its cap
    bool debt_capped = false;
};

/// Monte-Carlo estimates of dE[u(v(P))]/dpi_ij and dE[u(v(P))]/dgamma_ij at
/// the holder's current point, with standard errors. Under the identity
/// chain these reduce to the risk-neutral margins.
AttractivenessReport attractiveness_general(const HolderContext& holder, std::size_t issuer,
                                            const ReturnModel& model, std::size_t n_draws,
                                            std::uint64_t seed);

}  // namespace banknet::pricing
