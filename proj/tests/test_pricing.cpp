#include <doctest.h>

#include <cmath>
#include <random>

#include "banknet/pricing.hpp"
#include "banknet/returns.hpp"
#include "oracles.hpp"

using namespace banknet;

namespace {

Institution bank(double ax, double debt, double rd = 0.0) {
    Institution b;
    b.external_assets = ax;
    b.nominal_debt = debt;
    b.debt_rate = rd;
    return b;
}

constexpr double kMu = 0.0094;
constexpr double kSigma = 0.0336;

}  // namespace

TEST_CASE("no debt means equity owns the whole asset") {
    const auto [ek, el] = pricing::expected_claims(bank(10.0, 0.0), kMu, kSigma, 1.0);
    CHECK(ek == doctest::Approx(10.0 * std::exp(kMu + 0.5 * kSigma * kSigma)).epsilon(1e-14));
    CHECK(el == 0.0);
}

TEST_CASE("deterministic solvent limit splits book values") {
    const auto [ek, el] = pricing::expected_claims(bank(10.0, 9.0), 0.0097, 1e-9, 1.0);
    CHECK(ek == doctest::Approx(10.0 * std::exp(0.0097) - 9.0).epsilon(1e-9));
    CHECK(el == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("zero assets with debt outstanding valueless on both sides") {
    const auto [ek, el] = pricing::expected_claims(bank(0.0, 5.0), kMu, kSigma, 1.0);
    CHECK(ek == 0.0);
    CHECK(el == 0.0);
    const auto [ek2, el2] = pricing::expected_claims(bank(0.0, 0.0), kMu, kSigma, 1.0);
    CHECK(ek2 == 0.0);
    CHECK(el2 == 0.0);
}

TEST_CASE("closed form matches Monte Carlo on a stylized levered bank") {
    const returns::CalibrationTarget t{0.01, 0.001, 0.95};
    const auto cal = returns::calibrate(t);
    const auto [ek, el] = pricing::expected_claims(bank(10.0, 9.0), cal.log_mean, cal.log_vol, 1.0);

    ReturnModel m;
    m.log_mean = {cal.log_mean};
    m.log_vol = {cal.log_vol};
    m.correlation = Matrix(1, 1);
    m.correlation(0, 0) = 1.0;
    const std::size_t n = 1000000;
    const auto d = returns::sample_gross_returns(m, n, 5);
    double sum_k = 0.0, sum_k2 = 0.0, sum_l = 0.0, sum_l2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double assets = 10.0 * d(k, 0);
        const double pk = std::max(assets - 9.0, 0.0);
        const double pl = std::min(assets, 9.0);
        sum_k += pk;
        sum_k2 += pk * pk;
        sum_l += pl;
        sum_l2 += pl * pl;
    }
    const double nk = static_cast<double>(n);
    const double mc_k = sum_k / nk, mc_l = sum_l / nk;
    const double se_k = std::sqrt((sum_k2 / nk - mc_k * mc_k) / nk);
    const double se_l = std::sqrt(std::max(0.0, sum_l2 / nk - mc_l * mc_l) / nk);
    CHECK(std::fabs(ek - mc_k) < 3.0 * se_k);
    // the debt leg is nearly constant: allow for the unsampled default tail
    CHECK(std::fabs(el - mc_l) < 3.0 * std::max(se_l, 1e-9));
}

TEST_CASE("conservation: equity plus debt equals scaled asset mean") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uax(0.1, 50.0), ul(0.0, 60.0), us(0.005, 0.8),
        um(-0.2, 0.2), uk(1.0, 1.5), urd(0.0, 0.05);
    for (int i = 0; i < 1000; ++i) {
        const double ax = uax(rng), mu = um(rng), sig = us(rng), kap = uk(rng);
        const auto b = bank(ax, ul(rng), urd(rng));
        const auto [ek, el] = pricing::expected_claims(b, mu, sig, kap);
        const double total = kap * ax * std::exp(mu + 0.5 * sig * sig);
        CHECK(std::fabs(ek + el - total) <= 1e-10 * std::max(1.0, total));
        CHECK(ek >= 0.0);
        CHECK(el >= -1e-15);
        CHECK(el <= b.nominal_debt * (1.0 + b.debt_rate) * (1.0 + 1e-12) + 1e-12);
    }
}

TEST_CASE("expected equity grows with drift and assets, debt value with nominals") {
    const auto base = pricing::expected_claims(bank(10.0, 9.0), kMu, kSigma, 1.0);
    CHECK(pricing::expected_claims(bank(10.0, 9.0), kMu + 0.01, kSigma, 1.0).first > base.first);
    CHECK(pricing::expected_claims(bank(11.0, 9.0), kMu, kSigma, 1.0).first > base.first);
    CHECK(pricing::expected_claims(bank(10.0, 9.5), kMu, kSigma, 1.0).second > base.second);
}

TEST_CASE("crushing debt sends equity to zero and debt to the asset mean") {
    const double total = 10.0 * std::exp(kMu + 0.5 * kSigma * kSigma);
    const auto [ek, el] = pricing::expected_claims(bank(10.0, 1e9), kMu, kSigma, 1.0);
    CHECK(ek <= 1e-12);
    CHECK(el == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("market values discount expected payoffs at the risk-free rate") {
    const auto p0 = pricing::market_values(bank(10.0, 9.0), kMu, kSigma, 1.0, 0.0);
    CHECK(p0.market_equity == p0.expected_equity);
    CHECK(p0.market_debt == p0.expected_debt);
    const auto p2 = pricing::market_values(bank(10.0, 9.0), kMu, kSigma, 1.0, 0.02);
    CHECK(p2.market_equity == doctest::Approx(p2.expected_equity / 1.02).epsilon(1e-15));
    // balance-sheet identity after discounting
    const double total = 10.0 * std::exp(kMu + 0.5 * kSigma * kSigma) / 1.02;
    CHECK(p2.market_equity + p2.market_debt == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("deterministic solvent bank prices at book") {
    const auto p = pricing::market_values(bank(10.0, 9.0), 0.0, 1e-12, 1.0, 0.0);
    CHECK(p.market_equity == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.market_debt == doctest::Approx(9.0).epsilon(1e-12));
}

namespace {

pricing::IssuerParams issuer(double ax, double debt, double rd = 0.0) {
    pricing::IssuerParams is;
    is.external_assets = ax;
    is.nominal_debt = debt;
    is.debt_rate = rd;
    is.log_mean = kMu;
    is.log_vol = kSigma;
    return is;
}

}  // namespace

TEST_CASE("physical-probability pricing makes fair claims exactly break even at zero rates") {
    const auto share = pricing::share_attractive_rn(issuer(10, 9), 0.0, 0.0);
    CHECK(share.margin == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_FALSE(share.attractive);
    const auto debt = pricing::debt_attractive_rn(issuer(10, 9), 0.0, 0.0);
    CHECK(debt.margin == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("positive funding cost makes fairly priced claims unattractive") {
    const auto share = pricing::share_attractive_rn(issuer(10, 9), 0.01, 0.0);
    CHECK(share.margin < 0.0);
    CHECK_FALSE(share.attractive);
    const auto debt = pricing::debt_attractive_rn(issuer(10, 9), 0.01, 0.0);
    CHECK(debt.margin < 0.0);
}

TEST_CASE("an underpriced share is attractive") {
    const auto fair = pricing::share_attractive_rn(issuer(10, 9), 0.0, 0.0);
    const auto cheap = pricing::share_attractive_rn(issuer(10, 9), 0.0, 0.0, fair.price / 2.0);
    CHECK(cheap.attractive);
    CHECK(cheap.margin > 0.0);
}

TEST_CASE("risk-neutral debt margin matches a Monte Carlo of min(a r + d, L*(1))") {
    // issuer with cash, so the d_j = kappa (Ax + Al (1+r_rf)) shift matters
    auto is = issuer(10, 9.5, 0.01);
    is.cash = 1.5;
    const double rrf = 0.005;
    const auto check = pricing::debt_attractive_rn(is, 0.02, rrf);

    ReturnModel m;
    m.log_mean = {kMu};
    m.log_vol = {kSigma};
    m.correlation = Matrix(1, 1);
    m.correlation(0, 0) = 1.0;
    const std::size_t n = 1000000;
    const auto g = returns::sample_gross_returns(m, n, 77);
    const double a = is.external_assets;                 // kappa = 1
    const double dj = is.external_assets + is.cash * (1.0 + rrf);
    const double lbar = is.nominal_debt * (1.0 + is.debt_rate);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = g(k, 0) - 1.0;   // net return realization
        const double v = std::min(a * r + dj, lbar);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt(std::max(sum2 / n - mean * mean, 0.0) / n);
    const double mc_margin = mean - (1.0 + 0.02) * check.price;
    CHECK(std::fabs(check.margin - mc_margin) < 3.0 * std::max(se, 1e-9));
}

TEST_CASE("risk-neutral marginal utilities reduce to the closed-form margins") {
    const returns::CalibrationTarget t{0.01, 0.001, 0.911};
    const auto cal = returns::calibrate(t);

    pricing::HolderContext holder;
    holder.utility = objective::UtilityKind::identity;
    holder.own.bank_index = 1;
    holder.own.equity = 1.0;
    holder.own.debt_rate = 0.01;

    objective::Counterparty c;
    c.bank_index = 0;
    c.external_assets = 10.0;
    c.nominal_debt = 9.0;
    auto cp_issuer = issuer(10, 9);
    cp_issuer.log_mean = cal.log_mean;
    cp_issuer.log_vol = cal.log_vol;
    const auto prices = pricing::market_values(
        bank(10, 9), cal.log_mean, cal.log_vol, 1.0, 0.0);
    c.price_equity = prices.market_equity;
    c.price_debt = prices.market_debt;
    holder.snapshot = {c};
    holder.ctrl.external_assets = 12.0;
    holder.ctrl.shares = {0.1};
    holder.ctrl.debts = {0.0};

    ReturnModel m;
    m.log_mean = {cal.log_mean, cal.log_mean};
    m.log_vol = {cal.log_vol, cal.log_vol};
    m.correlation = Matrix(2, 2);
    m.correlation(0, 0) = m.correlation(1, 1) = 1.0;
    m.correlation(0, 1) = m.correlation(1, 0) = -0.9;

    const auto rep = pricing::attractiveness_general(holder, 0, m, 200000, 99);
    const auto share_cf = pricing::share_attractive_rn(cp_issuer, 0.01, 0.0, c.price_equity);
    const auto debt_cf = pricing::debt_attractive_rn(cp_issuer, 0.01, 0.0, c.price_debt);
    CHECK(std::fabs(rep.share_margin - share_cf.margin) < 3.0 * rep.share_se);
    CHECK(std::fabs(rep.debt_margin - debt_cf.margin) < 3.0 * std::max(rep.debt_se, 1e-9));
    CHECK_FALSE(rep.share_capped);
}

TEST_CASE("a positive-margin holding at its cap reports capped") {
    pricing::HolderContext holder;
    holder.utility = objective::UtilityKind::identity;
    holder.own.bank_index = 1;
    holder.own.equity = 1.0;
    holder.own.debt_rate = 0.0;
    holder.cap_share = 0.25;

    objective::Counterparty c;
    c.bank_index = 0;
    c.external_assets = 10.0;
    c.nominal_debt = 9.0;
    c.price_equity = 0.5;   // half of fair: strictly attractive
    c.price_debt = 9.0;
    holder.snapshot = {c};
    holder.ctrl.external_assets = 5.0;
    holder.ctrl.shares = {0.25};   // at the cap
    holder.ctrl.debts = {0.0};

    ReturnModel m;
    m.log_mean = {kMu, kMu};
    m.log_vol = {kSigma, kSigma};
    m.correlation = Matrix(2, 2);
    m.correlation(0, 0) = m.correlation(1, 1) = 1.0;

    const auto rep = pricing::attractiveness_general(holder, 0, m, 50000, 3);
    CHECK(rep.share_margin > 0.0);
    CHECK(rep.share_capped);
}

TEST_CASE("symmetric banks see symmetric margins under swapped roles") {
    pricing::HolderContext h1, h2;
    for (auto* h : {&h1, &h2}) {
        h->utility = objective::UtilityKind::log_softplus;
        h->own.equity = 1.0;
        h->own.debt_rate = 0.0;
        h->ctrl.external_assets = 12.0;
        h->ctrl.shares = {0.2};
        h->ctrl.debts = {0.05};
    }
    h1.own.bank_index = 0;
    h2.own.bank_index = 1;
    objective::Counterparty c;
    c.external_assets = 10.0;
    c.nominal_debt = 9.0;
    c.price_equity = 1.1;
    c.price_debt = 9.0;
    auto c1 = c, c2 = c;
    c1.bank_index = 1;
    c2.bank_index = 0;
    h1.snapshot = {c1};
    h2.snapshot = {c2};

    ReturnModel m;
    m.log_mean = {kMu, kMu};
    m.log_vol = {kSigma, kSigma};
    m.correlation = Matrix(2, 2);
    m.correlation(0, 0) = m.correlation(1, 1) = 1.0;
    m.correlation(0, 1) = m.correlation(1, 0) = -0.5;

    const auto r1 = pricing::attractiveness_general(h1, 0, m, 100000, 5);
    const auto r2 = pricing::attractiveness_general(h2, 0, m, 100000, 6);
    CHECK(std::fabs(r1.share_margin - r2.share_margin) <
          3.0 * std::hypot(r1.share_se, r2.share_se));
    CHECK(std::fabs(r1.debt_margin - r2.debt_margin) <
          3.0 * std::max(std::hypot(r1.debt_se, r2.debt_se), 1e-9));
}
