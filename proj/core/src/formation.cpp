#include "banknet/formation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "banknet/pricing.hpp"
#include "banknet/rng.hpp"

namespace banknet::formation {

namespace {

struct BankState {
    double external_assets = 0.0;
    double cash = 0.0;
    double maturity = 1.0;
    double debt = 0.0;                    // implied L^(0) = L* (solvent at t=0)
    std::vector<double> shares, debts;    // full n-vectors, self entries 0
    bool published = false;
    int optimizations = 0;
    double last_change = 0.0;
};

double kappa_of(const BankState& s, const BankSetup& setup, KappaMode mode) {
    if (mode == KappaMode::one) return 1.0;
    const double assets = s.external_assets + s.cash;
    if (assets <= 0.0) return 1.0;
    return (s.debt + setup.equity) / assets;
}

// Relative change with an absolute floor: sub-floor moves on zero-valued
// controls never count as changes.
double rel_change(double old_v, double new_v, double floor) {
    const double delta = std::fabs(new_v - old_v);
    if (delta <= floor) return 0.0;
    return delta / std::max(std::fabs(old_v), floor);
}

}  // namespace

FormationResult form_network(const std::vector<BankSetup>& banks, const FormationConfig& cfg) {
    const std::size_t n = banks.size();
    if (n == 0) throw FormationError("form_network: at least one bank required");
    if (cfg.correlation.rows() != n || cfg.correlation.cols() != n)
        throw FormationError("form_network: correlation matrix must be n x n");

    FormationResult res;
    res.log_mean.resize(n);
    res.log_vol.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (banks[i].log_mean_override && banks[i].log_vol_override) {
            res.log_mean[i] = *banks[i].log_mean_override;
            res.log_vol[i] = *banks[i].log_vol_override;
        } else {
            const auto cal = returns::calibrate(banks[i].calibration);
            res.log_mean[i] = cal.log_mean;
            res.log_vol[i] = cal.log_vol;
        }
    }

    ReturnModel model;
    model.log_mean = res.log_mean;
    model.log_vol = res.log_vol;
    model.correlation = cfg.correlation;
    const returns::DrawMatrix draws =
        returns::sample_gross_returns(model, cfg.draw_count, cfg.seed);

    std::vector<int> order = cfg.order;
    if (order.empty()) {
        order.resize(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    }

    std::vector<BankState> state(n);
    for (std::size_t i = 0; i < n; ++i) {
        state[i].maturity = banks[i].maturity;
        state[i].cash = banks[i].cash;
        state[i].shares.assign(n, 0.0);
        state[i].debts.assign(n, 0.0);
    }

    auto price_of = [&](std::size_t j) {
        Institution proxy;
        proxy.external_assets = state[j].external_assets;
        proxy.cash = state[j].cash;
        proxy.nominal_debt = state[j].debt;
        proxy.debt_rate = banks[j].debt_rate;
        const double kap = kappa_of(state[j], banks[j], cfg.kappa);
        return pricing::market_values(proxy, res.log_mean[j], res.log_vol[j], kap,
                                      cfg.risk_free_rate);
    };

    int step_counter = 0;
    int round = 0;
    bool converged = false;

    for (round = 1; round <= cfg.max_rounds && !converged; ++round) {
        for (int bank : order) {
            const std::size_t b = static_cast<std::size_t>(bank);
            ++step_counter;

            // snapshot of every published counterparty
            objective::CounterpartySnapshot snap;
            std::vector<double> pk(n, 0.0), pl(n, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == b || !state[j].published) continue;
                const auto prices = price_of(j);
                objective::Counterparty c;
                c.bank_index = static_cast<int>(j);
                c.kappa = prices.scaling;
                c.external_assets = state[j].external_assets;
                c.cash = state[j].cash;
                c.nominal_debt = state[j].debt;
                c.debt_rate = banks[j].debt_rate;
                c.price_equity = prices.market_equity;
                c.price_debt = prices.market_debt;
                snap.push_back(c);
                pk[j] = prices.market_equity;
                pl[j] = prices.market_debt;
            }

            objective::OwnParams own;
            own.bank_index = bank;
            own.equity = banks[b].equity;
            own.risk_free_rate = cfg.risk_free_rate;
            own.debt_rate = banks[b].debt_rate;

            optimizer::OptimizeSpec ospec;
            ospec.free_external = true;
            ospec.free_cash = cfg.free_cash;
            ospec.free_maturity = cfg.free_maturity;
            ospec.free_shares = true;
            ospec.free_debts = true;
            ospec.liquidity_active = cfg.free_cash;
            ospec.policy = cfg.policy;
            ospec.own_index = b;
            ospec.draw_count = cfg.draw_count;
            ospec.seed = derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(step_counter));
            ospec.tol_obj = cfg.tol_obj;
            ospec.tol_feas = cfg.tol_feas;
            ospec.multi_start = cfg.multi_start;
            ospec.threads = cfg.threads;

            objective::ControlVector base;
            base.external_assets = state[b].external_assets;
            base.cash = state[b].cash;
            base.maturity = state[b].maturity;
            base.shares.assign(snap.size(), 0.0);
            base.debts.assign(snap.size(), 0.0);

            std::optional<objective::ControlVector> warm;
            if (state[b].optimizations > 0) {
                objective::ControlVector w = base;
                for (std::size_t s = 0; s < snap.size(); ++s) {
                    const std::size_t j = static_cast<std::size_t>(snap[s].bank_index);
                    w.shares[s] = state[b].shares[j];
                    w.debts[s] = state[b].debts[j];
                }
                warm = w;
            }

            optimizer::OptimizeResult opt;
            try {
                opt = optimizer::optimize(ospec, own, snap, draws, base, warm);
            } catch (const optimizer::InfeasibleError& e) {
                throw FormationError("form_network: step " + std::to_string(step_counter) +
                                     " (bank " + std::to_string(bank + 1) + "): " + e.what());
            }

            // change vs this bank's previous optimization, over all controls
            // plus the implied debt
            double change = 0.0;
            const double floor = 1e-8;
            if (state[b].optimizations > 0) {
                change = std::max(change, rel_change(state[b].external_assets,
                                                     opt.control.external_assets, floor));
                change = std::max(change, rel_change(state[b].cash, opt.control.cash, floor));
                change = std::max(change,
                                  rel_change(state[b].maturity, opt.control.maturity, floor));
                change = std::max(change, rel_change(state[b].debt, opt.implied_debt, floor));
                for (std::size_t s = 0; s < snap.size(); ++s) {
                    const std::size_t j = static_cast<std::size_t>(snap[s].bank_index);
                    change = std::max(change,
                                      rel_change(state[b].shares[j], opt.control.shares[s], floor));
                    change = std::max(change,
                                      rel_change(state[b].debts[j], opt.control.debts[s], floor));
                }
            } else {
                change = std::numeric_limits<double>::infinity();
            }

            // publish
            state[b].external_assets = opt.control.external_assets;
            state[b].cash = opt.control.cash;
            state[b].maturity = opt.control.maturity;
            state[b].debt = opt.implied_debt;
            state[b].shares.assign(n, 0.0);
            state[b].debts.assign(n, 0.0);
            for (std::size_t s = 0; s < snap.size(); ++s) {
                const std::size_t j = static_cast<std::size_t>(snap[s].bank_index);
                state[b].shares[j] = opt.control.shares[s];
                state[b].debts[j] = opt.control.debts[s];
            }
            state[b].published = true;
            state[b].optimizations += 1;
            state[b].last_change = change;

            StepRecord rec;
            rec.round = round;
            rec.step = step_counter;
            rec.bank = bank;
            rec.control.external_assets = state[b].external_assets;
            rec.control.cash = state[b].cash;
            rec.control.maturity = state[b].maturity;
            rec.control.shares = state[b].shares;
            rec.control.debts = state[b].debts;
            rec.implied_debt = state[b].debt;
            rec.eu = opt.eu;
            rec.max_rel_change = change;
            rec.price_equity = pk;
            rec.price_debt = pl;
            res.trajectory.push_back(std::move(rec));
        }

        converged = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (state[i].optimizations < 2 || state[i].last_change >= cfg.conv_tol) {
                converged = false;
                break;
            }
        }
    }

    res.rounds = round - 1;
    res.converged = converged;

    // assemble the network
    std::vector<Institution> insts(n);
    Matrix pi(n, n), ga(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        insts[i].external_assets = state[i].external_assets;
        insts[i].cash = state[i].cash;
        insts[i].nominal_debt = state[i].debt;
        insts[i].equity_book = banks[i].equity;
        insts[i].maturity = state[i].maturity;
        insts[i].debt_rate = banks[i].debt_rate;
        for (std::size_t j = 0; j < n; ++j) {
            pi(i, j) = state[i].shares[j];
            ga(i, j) = state[i].debts[j];
        }
    }
    res.network = Network(std::move(insts), std::move(pi), std::move(ga), cfg.risk_free_rate);

    // (BC) consistency at the final prices
    res.bc_residual.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double assets = state[i].external_assets + state[i].cash;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !state[j].published) continue;
            const auto prices = price_of(j);
            assets += state[i].shares[j] * prices.market_equity;
            assets += state[i].debts[j] * prices.market_debt;
        }
        res.bc_residual[i] = std::fabs(assets - banks[i].equity - state[i].debt);
    }
    return res;
}

}  // namespace banknet::formation
