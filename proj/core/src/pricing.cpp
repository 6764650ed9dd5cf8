#include "banknet/pricing.hpp"

#include <cmath>
#include <tuple>

#include "banknet/normal.hpp"

namespace banknet::pricing {

ClaimSplit lognormal_claim_split(double scale, double strike, double log_mean, double log_vol) {
    ClaimSplit out;
    if (scale <= 0.0) {
        out.call = std::max(-strike, 0.0);
        out.floor = std::min(0.0, strike);
        return out;
    }
    const double mean_assets = scale * std::exp(log_mean + 0.5 * log_vol * log_vol);
    if (strike <= 0.0) {
        out.call = mean_assets - strike;
        out.floor = strike;
        return out;
    }
    if (log_vol <= 0.0) {
        const double v = scale * std::exp(log_mean);
        out.call = std::max(v - strike, 0.0);
        out.floor = std::min(v, strike);
        return out;
    }
    const double u = (std::log(strike / scale) - log_mean) / log_vol;
    const double itm = 1.0 - norm_cdf(u);            // P(assets > strike)
    const double tail = 1.0 - norm_cdf(u - log_vol); // share of asset mass above the strike
    out.call = mean_assets * tail - strike * itm;
    out.floor = mean_assets * (1.0 - tail) + strike * itm;
    return out;
}

std::pair<double, double> expected_claims(const Institution& inst, double log_mean,
                                          double log_vol, double kappa) {
    const double matured = inst.nominal_debt * (1.0 + inst.debt_rate);
    const ClaimSplit s =
        lognormal_claim_split(kappa * inst.external_assets, matured, log_mean, log_vol);
    return {s.call, s.floor};
}

ClaimPrices market_values(const Institution& inst, double log_mean, double log_vol,
                          double kappa, double risk_free_rate) {
    ClaimPrices p;
    p.scaling = kappa;
    std::tie(p.expected_equity, p.expected_debt) = expected_claims(inst, log_mean, log_vol, kappa);
    const double disc = 1.0 + risk_free_rate;
    p.market_equity = p.expected_equity / disc;
    p.market_debt = p.expected_debt / disc;
    return p;
}

namespace {

/// Expected claims with the issuer's cash folded in: the equity is a call
/// on kappa*Ax*G with strike L*(1) - kappa*Al*(1+r_rf), the debt is the
/// cash leg plus the floored remainder.
std::pair<double, double> expected_claims_with_cash(const IssuerParams& is,
                                                    double risk_free_rate) {
    const double cash_leg = is.kappa * is.cash * (1.0 + risk_free_rate);
    const double matured = is.nominal_debt * (1.0 + is.debt_rate);
    const ClaimSplit s = lognormal_claim_split(is.kappa * is.external_assets, matured - cash_leg,
                                               is.log_mean, is.log_vol);
    return {s.call, cash_leg + s.floor};
}

}  // namespace

AttractiveCheck share_attractive_rn(const IssuerParams& issuer, double holder_funding_rate,
                                    double risk_free_rate, std::optional<double> price_override) {
    const auto [ek, el] = expected_claims_with_cash(issuer, risk_free_rate);
    (void)el;
    AttractiveCheck c;
    c.price = price_override ? *price_override : ek / (1.0 + risk_free_rate);
    c.margin = ek - (1.0 + holder_funding_rate) * c.price;
    c.attractive = c.margin > 0.0;
    return c;
}

AttractiveCheck debt_attractive_rn(const IssuerParams& issuer, double holder_funding_rate,
                                   double risk_free_rate, std::optional<double> price_override) {
    const auto [ek, el] = expected_claims_with_cash(issuer, risk_free_rate);
    (void)ek;
    AttractiveCheck c;
    c.price = price_override ? *price_override : el / (1.0 + risk_free_rate);
    c.margin = el - (1.0 + holder_funding_rate) * c.price;
    c.attractive = c.margin > 0.0;
    return c;
}

AttractivenessReport attractiveness_general(const HolderContext& holder, std::size_t issuer,
                                            const ReturnModel& model, std::size_t n_draws,
                                            std::uint64_t seed) {
    const returns::DrawMatrix draws = returns::sample_gross_returns(model, n_draws, seed);
    const objective::PositionTable table(holder.snapshot, holder.own, draws);
    const auto share = table.holding_gradient(holder.ctrl, holder.utility, issuer, true);
    const auto debt = table.holding_gradient(holder.ctrl, holder.utility, issuer, false);

    AttractivenessReport rep;
    rep.share_margin = share.mean;
    rep.share_se = share.se;
    rep.debt_margin = debt.mean;
    rep.debt_se = debt.se;
    const double eps = 1e-12;
    rep.share_capped = share.mean > 0.0 && holder.ctrl.shares[issuer] >= holder.cap_share - eps;
    rep.debt_capped = debt.mean > 0.0 && holder.ctrl.debts[issuer] >= holder.cap_debt - eps;
    return rep;
}

}  // namespace banknet::pricing
