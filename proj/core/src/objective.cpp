#include "banknet/objective.hpp"

#include <cmath>
#include <thread>

namespace banknet::objective {

double softplus_equity(double p) {
    return std::max(p, 0.0) + std::log1p(std::exp(-std::fabs(p)));
}

double utility_chain(double p) {
    // log(log(1+e^P)) -> P as P -> -inf; switch before log1p underflows.
    if (p < -36.0) return p;
    return std::log(softplus_equity(p));
}

double chain_value(double p, UtilityKind kind) {
    return kind == UtilityKind::identity ? p : utility_chain(p);
}

double chain_weight(double p, UtilityKind kind) {
    if (kind == UtilityKind::identity) return 1.0;
    // sigmoid(P) / softplus(P), arranged to stay finite in both tails.
    if (p <= 0.0) {
        const double t = std::exp(p);
        const double sp = std::log1p(t);
        if (sp == 0.0) return 1.0;
        return t / ((1.0 + t) * sp);
    }
    const double s = std::exp(-p);
    return 1.0 / ((1.0 + s) * (p + std::log1p(s)));
}

double yield_curve(double omega, const YieldCurveSpec& spec) {
    return spec.alpha - spec.beta * std::exp(omega);
}

void validate_yield_curve(const YieldCurveSpec& spec, double risk_free_rate) {
    if (!(spec.beta > 0.0))
        throw std::invalid_argument("yield curve: beta must be > 0 (needs r_D' != 0, r_D'' < 0)");
    // r_D is decreasing in omega, so the minimum over [0,1] sits at omega = 1.
    const double lo = yield_curve(1.0, spec);
    if (!(lo > risk_free_rate))
        throw std::invalid_argument("yield curve: r_D(omega) must stay above the risk-free rate on [0,1]");
}

double liquidity_requirement(double omega, double debt, double weight_liquidity) {
    return weight_liquidity * std::exp(omega) * std::exp(debt);
}

double implied_debt(const ControlVector& ctrl, const CounterpartySnapshot& snap,
                    const OwnParams& own) {
    double assets = ctrl.external_assets + ctrl.cash;
    for (std::size_t j = 0; j < snap.size(); ++j) {
        assets += ctrl.shares[j] * snap[j].price_equity;
        assets += ctrl.debts[j] * snap[j].price_debt;
    }
    return assets - own.equity;
}

double position(const ControlVector& ctrl, const CounterpartySnapshot& snap,
                const OwnParams& own, std::span<const double> gross_returns) {
    const double growth_rf = 1.0 + own.risk_free_rate;
    double p = ctrl.external_assets * gross_returns[static_cast<std::size_t>(own.bank_index)] +
               ctrl.cash * growth_rf;
    for (std::size_t j = 0; j < snap.size(); ++j) {
        const Counterparty& c = snap[j];
        const double assets =
            c.kappa * (c.external_assets * gross_returns[static_cast<std::size_t>(c.bank_index)] +
                       c.cash * growth_rf);
        const double matured = c.matured_debt();
        p += ctrl.shares[j] * std::max(assets - matured, 0.0);
        p += ctrl.debts[j] * std::min(assets, matured);
    }
    const double funding = 1.0 + own.funding_rate(ctrl.maturity);
    return p - funding * implied_debt(ctrl, snap, own);
}

PositionTable::PositionTable(const CounterpartySnapshot& snap, const OwnParams& own,
                             const returns::DrawMatrix& draws)
    : snap_(snap), own_(own), n_draws_(draws.draws()), m_(snap.size()) {
    const double growth_rf = 1.0 + own.risk_free_rate;
    cols_.resize(n_draws_ * stride());
    for (std::size_t k = 0; k < n_draws_; ++k) {
        double* row = cols_.data() + k * stride();
        row[0] = draws(k, static_cast<std::size_t>(own.bank_index));
        for (std::size_t j = 0; j < m_; ++j) {
            const Counterparty& c = snap_[j];
            const double assets =
                c.kappa * (c.external_assets * draws(k, static_cast<std::size_t>(c.bank_index)) +
                           c.cash * growth_rf);
            const double matured = c.matured_debt();
            row[1 + j] = std::max(assets - matured, 0.0);
            row[1 + m_ + j] = std::min(assets, matured);
        }
    }
}

double PositionTable::position_at(std::size_t k, const ControlVector& ctrl, double funding,
                                  double debt) const {
    const double* row = cols_.data() + k * stride();
    double p = ctrl.external_assets * row[0] + ctrl.cash * (1.0 + own_.risk_free_rate);
    for (std::size_t j = 0; j < m_; ++j) {
        p += ctrl.shares[j] * row[1 + j] + ctrl.debts[j] * row[1 + m_ + j];
    }
    return p - funding * debt;
}

namespace {

constexpr std::size_t kBlock = 8192;

struct BlockStats {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::ptrdiff_t first_bad = -1;
};

[[noreturn]] void throw_bad_draw(std::ptrdiff_t index) {
    throw std::runtime_error("expected_utility: non-finite utility at draw " +
                             std::to_string(index));
}

}  // namespace

EuEstimate PositionTable::expected_utility(const ControlVector& ctrl, UtilityKind kind,
                                           int threads) const {
    const double funding = 1.0 + own_.funding_rate(ctrl.maturity);
    const double debt = implied_debt(ctrl, snap_, own_);
    const std::size_t n_blocks = (n_draws_ + kBlock - 1) / kBlock;
    std::vector<BlockStats> parts(n_blocks);

    auto run_block = [&](std::size_t b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(lo + kBlock, n_draws_);
        BlockStats st;
        for (std::size_t k = lo; k < hi; ++k) {
            const double u = chain_value(position_at(k, ctrl, funding, debt), kind);
            if (!std::isfinite(u) && st.first_bad < 0) st.first_bad = static_cast<std::ptrdiff_t>(k);
            st.sum += u;
            st.sum_sq += u * u;
        }
        parts[b] = st;
    };

    if (threads <= 1 || n_blocks <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        const int t_count = std::min<std::size_t>(static_cast<std::size_t>(threads), n_blocks);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(t_count));
        for (int t = 0; t < t_count; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t b = static_cast<std::size_t>(t); b < n_blocks;
                     b += static_cast<std::size_t>(t_count))
                    run_block(b);
            });
        }
        for (auto& th : pool) th.join();
    }

    double sum = 0.0, sum_sq = 0.0;
    for (const BlockStats& st : parts) {
        if (st.first_bad >= 0) throw_bad_draw(st.first_bad);
        sum += st.sum;
        sum_sq += st.sum_sq;
    }
    const double n = static_cast<double>(n_draws_);
    EuEstimate out;
    out.mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / std::max(1.0, n - 1.0));
    out.se = std::sqrt(var / n);
    return out;
}

EuEstimate PositionTable::expected_utility_grad(const ControlVector& ctrl, UtilityKind kind,
                                                std::vector<double>& grad, int threads) const {
    const double funding = 1.0 + own_.funding_rate(ctrl.maturity);
    const double debt = implied_debt(ctrl, snap_, own_);
    const double growth_rf = 1.0 + own_.risk_free_rate;
    const std::size_t dims = 3 + 2 * m_;
    grad.assign(dims, 0.0);

    const std::size_t n_blocks = (n_draws_ + kBlock - 1) / kBlock;
    std::vector<BlockStats> parts(n_blocks);
    std::vector<double> part_grad(n_blocks * dims, 0.0);

    auto run_block = [&](std::size_t b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(lo + kBlock, n_draws_);
        BlockStats st;
        double* g = part_grad.data() + b * dims;
        for (std::size_t k = lo; k < hi; ++k) {
            const double* row = cols_.data() + k * stride();
            const double p = position_at(k, ctrl, funding, debt);
            const double u = chain_value(p, kind);
            if (!std::isfinite(u) && st.first_bad < 0) st.first_bad = static_cast<std::ptrdiff_t>(k);
            st.sum += u;
            st.sum_sq += u * u;
            const double w = chain_weight(p, kind);
            g[0] += w * (row[0] - funding);
            g[1] += w * (growth_rf - funding);
            g[2] += w;   // scaled by -r_D'(omega)*debt after the loop
            for (std::size_t j = 0; j < m_; ++j) {
                g[3 + j] += w * (row[1 + j] - funding * snap_[j].price_equity);
                g[3 + m_ + j] += w * (row[1 + m_ + j] - funding * snap_[j].price_debt);
            }
        }
        parts[b] = st;
    };

    if (threads <= 1 || n_blocks <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        const int t_count = std::min<std::size_t>(static_cast<std::size_t>(threads), n_blocks);
        std::vector<std::thread> pool;
        for (int t = 0; t < t_count; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t b = static_cast<std::size_t>(t); b < n_blocks;
                     b += static_cast<std::size_t>(t_count))
                    run_block(b);
            });
        }
        for (auto& th : pool) th.join();
    }

    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        if (parts[b].first_bad >= 0) throw_bad_draw(parts[b].first_bad);
        sum += parts[b].sum;
        sum_sq += parts[b].sum_sq;
        for (std::size_t d = 0; d < dims; ++d) grad[d] += part_grad[b * dims + d];
    }
    const double n = static_cast<double>(n_draws_);
    for (std::size_t d = 0; d < dims; ++d) grad[d] /= n;
    // d(funding)/d(omega) = r_D'(omega) = -beta*exp(omega) when on a curve,
    // 0 for a fixed rate.
    double slope = 0.0;
    if (own_.curve) slope = -own_.curve->beta * std::exp(ctrl.maturity);
    grad[2] *= -slope * debt;

    EuEstimate out;
    out.mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / std::max(1.0, n - 1.0));
    out.se = std::sqrt(var / n);
    return out;
}

EuEstimate PositionTable::holding_gradient(const ControlVector& ctrl, UtilityKind kind,
                                           std::size_t counterparty, bool share) const {
    const double funding = 1.0 + own_.funding_rate(ctrl.maturity);
    const double debt = implied_debt(ctrl, snap_, own_);
    const double price = share ? snap_[counterparty].price_equity : snap_[counterparty].price_debt;
    const std::size_t off = share ? 1 + counterparty : 1 + m_ + counterparty;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t k = 0; k < n_draws_; ++k) {
        const double p = position_at(k, ctrl, funding, debt);
        const double term = chain_weight(p, kind) * (cols_[k * stride() + off] - funding * price);
        if (!std::isfinite(term)) throw_bad_draw(static_cast<std::ptrdiff_t>(k));
        sum += term;
        sum_sq += term * term;
    }
    const double n = static_cast<double>(n_draws_);
    EuEstimate out;
    out.mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / std::max(1.0, n - 1.0));
    out.se = std::sqrt(var / n);
    return out;
}

EuEstimate expected_utility(const ControlVector& ctrl, const CounterpartySnapshot& snap,
                            const OwnParams& own, const returns::DrawMatrix& draws,
                            UtilityKind kind, int threads) {
    return PositionTable(snap, own, draws).expected_utility(ctrl, kind, threads);
}

}  // namespace banknet::objective
