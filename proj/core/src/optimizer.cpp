#include "banknet/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "banknet/rng.hpp"

namespace banknet::optimizer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Ctl { external, cash, maturity, share, debt };

struct Entry {
    Ctl kind;
    std::size_t j = 0;   // counterparty slot for share/debt
};

struct Layout {
    std::vector<Entry> entries;
    std::vector<double> lo, hi;

    std::size_t dims() const { return entries.size(); }
};

Layout build_layout(const OptimizeSpec& spec, const objective::CounterpartySnapshot& snap) {
    Layout l;
    auto add = [&](Entry e, double lo, double hi) {
        l.entries.push_back(e);
        l.lo.push_back(lo);
        l.hi.push_back(hi);
    };
    if (spec.free_external) add({Ctl::external}, 0.0, kInf);
    if (spec.free_cash) add({Ctl::cash}, 0.0, kInf);
    if (spec.free_maturity) add({Ctl::maturity}, 0.0, 1.0);
    const auto cap_of = [&](const std::vector<double>& caps, const objective::Counterparty& c) {
        const std::size_t idx = static_cast<std::size_t>(c.bank_index);
        return idx < caps.size() ? caps[idx] : 1.0;
    };
    for (std::size_t j = 0; j < snap.size(); ++j) {
        if (spec.free_shares)
            add({Ctl::share, j}, 0.0, cap_of(spec.policy.float_cap_shares, snap[j]));
        if (spec.free_debts)
            add({Ctl::debt, j}, 0.0, cap_of(spec.policy.float_cap_debt, snap[j]));
    }
    return l;
}

objective::ControlVector to_control(const Layout& l, const std::vector<double>& x,
                                    const objective::ControlVector& base) {
    objective::ControlVector c = base;
    for (std::size_t d = 0; d < l.dims(); ++d) {
        switch (l.entries[d].kind) {
            case Ctl::external: c.external_assets = x[d]; break;
            case Ctl::cash: c.cash = x[d]; break;
            case Ctl::maturity: c.maturity = x[d]; break;
            case Ctl::share: c.shares[l.entries[d].j] = x[d]; break;
            case Ctl::debt: c.debts[l.entries[d].j] = x[d]; break;
        }
    }
    return c;
}

// a . x <= b
struct HalfSpace {
    std::vector<double> a;
    double b = 0.0;
    double norm_sq = 0.0;
    std::string name;
};

double weight_external_of(const RegulatoryPolicy& p, std::size_t i) {
    if (p.weight_external.empty()) return 0.0;
    return p.weight_external[std::min(i, p.weight_external.size() - 1)];
}

struct Problem {
    Layout layout;
    std::vector<HalfSpace> planes;
    const OptimizeSpec* spec = nullptr;
    const objective::CounterpartySnapshot* snap = nullptr;
    const objective::OwnParams* own = nullptr;
    objective::ControlVector base;

    double sc_lhs(const objective::ControlVector& c) const {
        double s = weight_external_of(spec->policy, spec->own_index) * c.external_assets;
        for (std::size_t j = 0; j < snap->size(); ++j) {
            s += spec->policy.weight_shares * c.shares[j] * (*snap)[j].price_equity;
            s += spec->policy.weight_debt * c.debts[j] * (*snap)[j].price_debt;
        }
        return s;
    }

    double lc_violation(const objective::ControlVector& c) const {
        if (!spec->liquidity_active) return 0.0;
        const double debt = objective::implied_debt(c, *snap, *own);
        const double floor =
            objective::liquidity_requirement(c.maturity, debt, spec->policy.weight_liquidity);
        return std::max(0.0, floor - c.cash);
    }
};

Problem build_problem(const OptimizeSpec& spec, const objective::OwnParams& own,
                      const objective::CounterpartySnapshot& snap,
                      const objective::ControlVector& base) {
    Problem p;
    p.layout = build_layout(spec, snap);
    p.spec = &spec;
    p.snap = &snap;
    p.own = &own;
    p.base = base;

    const std::size_t d = p.layout.dims();
    const double k_ext = weight_external_of(spec.policy, spec.own_index);

    auto coeff = [&](const Entry& e, double ax_c, double cash_c, double pi_c, double ga_c,
                     std::size_t only_j) {
        switch (e.kind) {
            case Ctl::external: return ax_c;
            case Ctl::cash: return cash_c;
            case Ctl::maturity: return 0.0;
            case Ctl::share:
                return (only_j == std::size_t(-1) || e.j == only_j)
                           ? pi_c * snap[e.j].price_equity : 0.0;
            case Ctl::debt:
                return (only_j == std::size_t(-1) || e.j == only_j)
                           ? ga_c * snap[e.j].price_debt : 0.0;
        }
        return 0.0;
    };

    auto fixed_part = [&](double ax_c, double cash_c, double pi_c, double ga_c,
                          std::size_t only_j) {
        double s = 0.0;
        if (!spec.free_external) s += ax_c * base.external_assets;
        if (!spec.free_cash) s += cash_c * base.cash;
        for (std::size_t j = 0; j < snap.size(); ++j) {
            if (only_j != std::size_t(-1) && j != only_j) continue;
            if (!spec.free_shares) s += pi_c * base.shares[j] * snap[j].price_equity;
            if (!spec.free_debts) s += ga_c * base.debts[j] * snap[j].price_debt;
        }
        return s;
    };

    auto push_plane = [&](double ax_c, double cash_c, double pi_c, double ga_c, double rhs,
                          std::size_t only_j, std::string name) {
        HalfSpace h;
        h.a.resize(d);
        for (std::size_t i = 0; i < d; ++i)
            h.a[i] = coeff(p.layout.entries[i], ax_c, cash_c, pi_c, ga_c, only_j);
        h.b = rhs - fixed_part(ax_c, cash_c, pi_c, ga_c, only_j);
        h.norm_sq = std::inner_product(h.a.begin(), h.a.end(), h.a.begin(), 0.0);
        h.name = std::move(name);
        if (h.norm_sq > 0.0) p.planes.push_back(std::move(h));
    };

    // (SC): k^A Ax + k^pi sum pi K + k^gamma sum gamma L <= K^(0)
    push_plane(k_ext, 0.0, spec.policy.weight_shares, spec.policy.weight_debt, own.equity,
               std::size_t(-1), "SC");
    // implied debt >= 0: -(Ax + cash + sum pi K + sum gamma L) <= -K^(0)
    push_plane(-1.0, -1.0, -1.0, -1.0, -own.equity, std::size_t(-1), "L0");
    if (spec.policy.large_exposure_limit) {
        for (std::size_t j = 0; j < snap.size(); ++j) {
            push_plane(0.0, 0.0, spec.policy.weight_shares, spec.policy.weight_debt,
                       *spec.policy.large_exposure_limit * own.equity, j,
                       "exposure[" + std::to_string(snap[j].bank_index + 1) + "]");
        }
    }
    return p;
}

void clamp_box(const Layout& l, std::vector<double>& x) {
    for (std::size_t d = 0; d < l.dims(); ++d)
        x[d] = std::min(std::max(x[d], l.lo[d]), l.hi[d]);
}

/// Euclidean projection onto box intersected with the halfspaces, solved
/// through the dual: x(lambda) = clamp_box(y - sum lambda_s a_s) with
/// lambda >= 0, one multiplier per halfspace. Each coordinate update is an
/// exact 1-D root find (the constraint value is continuous and
/// nonincreasing in its own multiplier), swept until every plane holds.
/// Deterministic and accurate to ~1e-14, which matters: the ascent loop
/// projects every iterate, so projection bias would accumulate.
void project(const Problem& p, std::vector<double>& y) {
    const std::size_t d = p.layout.dims();
    if (p.planes.empty()) {
        clamp_box(p.layout, y);
        return;
    }
    const std::size_t k = p.planes.size();
    std::vector<double> lambda(k, 0.0), x(d);

    auto eval_plane = [&](std::size_t s) {
        // lhs of plane s at x(lambda) minus its rhs
        double lhs = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double v = y[i];
            for (std::size_t t = 0; t < k; ++t) v -= lambda[t] * p.planes[t].a[i];
            v = std::min(std::max(v, p.layout.lo[i]), p.layout.hi[i]);
            lhs += p.planes[s].a[i] * v;
        }
        return lhs - p.planes[s].b;
    };

    for (int sweep = 0; sweep < 64; ++sweep) {
        for (std::size_t s = 0; s < k; ++s) {
            lambda[s] = 0.0;
            if (eval_plane(s) <= 0.0) continue;
            double lo = 0.0, hi = 1.0;
            for (int grow = 0; grow < 80; ++grow) {
                lambda[s] = hi;
                if (eval_plane(s) <= 0.0) break;
                lo = hi;
                hi *= 2.0;
            }
            for (int bi = 0; bi < 90; ++bi) {
                const double mid = 0.5 * (lo + hi);
                lambda[s] = mid;
                if (eval_plane(s) > 0.0) lo = mid;
                else hi = mid;
            }
            lambda[s] = hi;   // the feasible side of the bracket
        }
        double worst = 0.0;
        for (std::size_t s = 0; s < k; ++s)
            worst = std::max(worst, eval_plane(s) / std::max(1.0, std::fabs(p.planes[s].b)));
        if (worst <= 1e-13) break;
    }

    for (std::size_t i = 0; i < d; ++i) {
        double v = y[i];
        for (std::size_t t = 0; t < k; ++t) v -= lambda[t] * p.planes[t].a[i];
        x[i] = std::min(std::max(v, p.layout.lo[i]), p.layout.hi[i]);
    }
    y = x;
}

bool feasible_linear(const Problem& p, const std::vector<double>& x, double tol) {
    for (std::size_t d = 0; d < p.layout.dims(); ++d) {
        if (x[d] < p.layout.lo[d] - tol || x[d] > p.layout.hi[d] + tol) return false;
    }
    for (const HalfSpace& h : p.planes) {
        double lhs = 0.0;
        for (std::size_t i = 0; i < p.layout.dims(); ++i) lhs += h.a[i] * x[i];
        if (lhs > h.b + tol * std::max(1.0, std::fabs(h.b))) return false;
    }
    return true;
}

struct Evaluator {
    const Problem* prob = nullptr;
    const objective::PositionTable* table = nullptr;
    double penalty_weight = 0.0;
    int threads = 1;

    double value(const std::vector<double>& x) const {
        const objective::ControlVector c = to_control(prob->layout, x, prob->base);
        double f = table->expected_utility(c, objective::UtilityKind::log_softplus, threads).mean;
        if (penalty_weight > 0.0) {
            const double v = prob->lc_violation(c);
            f -= penalty_weight * v * v;
        }
        return f;
    }

    double value_grad(const std::vector<double>& x, std::vector<double>& gx) const {
        const objective::ControlVector c = to_control(prob->layout, x, prob->base);
        std::vector<double> full;
        double f = table->expected_utility_grad(c, objective::UtilityKind::log_softplus, full,
                                                threads).mean;
        const std::size_t m = prob->snap->size();
        gx.assign(prob->layout.dims(), 0.0);
        for (std::size_t d = 0; d < prob->layout.dims(); ++d) {
            const Entry& e = prob->layout.entries[d];
            switch (e.kind) {
                case Ctl::external: gx[d] = full[0]; break;
                case Ctl::cash: gx[d] = full[1]; break;
                case Ctl::maturity: gx[d] = full[2]; break;
                case Ctl::share: gx[d] = full[3 + e.j]; break;
                case Ctl::debt: gx[d] = full[3 + m + e.j]; break;
            }
        }
        if (penalty_weight > 0.0) {
            const double v = prob->lc_violation(c);
            if (v > 0.0) {
                f -= penalty_weight * v * v;
                const double debt = objective::implied_debt(c, *prob->snap, *prob->own);
                const double floor = objective::liquidity_requirement(
                    c.maturity, debt, prob->spec->policy.weight_liquidity);
                for (std::size_t d = 0; d < prob->layout.dims(); ++d) {
                    const Entry& e = prob->layout.entries[d];
                    double dfloor = 0.0, dcash = 0.0;
                    switch (e.kind) {
                        case Ctl::external: dfloor = floor; break;   // dL/dAx = 1
                        case Ctl::cash: dfloor = floor; dcash = 1.0; break;
                        case Ctl::maturity: dfloor = floor; break;   // d/domega adds e^omega factor = same
                        case Ctl::share: dfloor = floor * (*prob->snap)[e.j].price_equity; break;
                        case Ctl::debt: dfloor = floor * (*prob->snap)[e.j].price_debt; break;
                    }
                    gx[d] -= 2.0 * penalty_weight * v * (dfloor - dcash);
                }
            }
        }
        return f;
    }
};

struct StartOutcome {
    std::vector<double> x;
    double f = -kInf;
    bool converged = false;
    int iterations = 0;
};

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

StartOutcome ascend(const Evaluator& ev, const Problem& prob, std::vector<double> x,
                    double tol_obj, int max_iter) {
    StartOutcome out;
    project(prob, x);
    std::vector<double> g, g_new, x_new(x.size()), d(x.size());
    double f = ev.value_grad(x, g);
    double step = 1.0;
    int stall = 0;
    int it = 0;
    for (; it < max_iter; ++it) {
        // projected trial point
        bool accepted = false;
        double f_new = f;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i < x.size(); ++i) x_new[i] = x[i] + step * g[i];
            project(prob, x_new);
            double gd = 0.0, dn = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                d[i] = x_new[i] - x[i];
                gd += g[i] * d[i];
                dn = std::max(dn, std::fabs(d[i]));
            }
            if (dn <= 1e-12 * (1.0 + max_abs(x))) {
                out.converged = true;
                break;
            }
            f_new = ev.value(x_new);
            if (f_new >= f + 1e-4 * gd) { accepted = true; break; }
            step *= 0.5;
        }
        if (!accepted) {
            out.converged = true;
            break;
        }
        const double improved = f_new - f;
        f = ev.value_grad(x_new, g_new);
        // Barzilai-Borwein step for the next round
        double dg = 0.0, dd = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            dg += d[i] * (g[i] - g_new[i]);
            dd += d[i] * d[i];
        }
        step = (dg > 1e-300) ? std::min(std::max(dd / dg, 1e-10), 1e10) : step * 2.0;
        x = x_new;
        g = g_new;
        if (improved <= tol_obj * std::max(1.0, std::fabs(f))) {
            if (++stall >= 5) { out.converged = true; ++it; break; }
        } else {
            stall = 0;
        }
    }
    out.x = std::move(x);
    out.f = f;
    out.iterations = it;
    return out;
}

std::vector<double> canonical_start(const Problem& p) {
    const std::size_t d = p.layout.dims();
    std::vector<double> x(d, 0.0);
    const OptimizeSpec& spec = *p.spec;
    double cash0 = 0.0;
    if (spec.free_cash && spec.liquidity_active) {
        // k^L * l(omega0, 0) with omega at its fixed value when not a control
        const double omega0 = spec.free_maturity ? 0.0 : p.base.maturity;
        cash0 = objective::liquidity_requirement(omega0, 0.0, spec.policy.weight_liquidity);
    }
    // assets already on the fixed side of the budget
    double fixed_assets = 0.0;
    if (!spec.free_external) fixed_assets += p.base.external_assets;
    if (!spec.free_cash) fixed_assets += p.base.cash;
    for (std::size_t j = 0; j < p.snap->size(); ++j) {
        if (!spec.free_shares) fixed_assets += p.base.shares[j] * (*p.snap)[j].price_equity;
        if (!spec.free_debts) fixed_assets += p.base.debts[j] * (*p.snap)[j].price_debt;
    }
    for (std::size_t i = 0; i < d; ++i) {
        switch (p.layout.entries[i].kind) {
            case Ctl::external:
                x[i] = std::max(0.0, p.own->equity - fixed_assets - cash0);
                break;
            case Ctl::cash: x[i] = cash0; break;
            default: break;
        }
    }
    clamp_box(p.layout, x);
    return x;
}

std::vector<double> random_start(const Problem& p, std::uint64_t seed, int index) {
    const Philox gen(derive_seed(seed, 0x5747u));
    const std::size_t d = p.layout.dims();
    std::vector<double> x(d, 0.0);
    const double k_ext = std::max(weight_external_of(p.spec->policy, p.spec->own_index), 1e-6);
    const double ax_hi = p.own->equity / k_ext;
    for (std::size_t i = 0; i < d; ++i) {
        const double u = gen.uniform2(static_cast<std::uint64_t>(index), i)[0];
        switch (p.layout.entries[i].kind) {
            case Ctl::external: x[i] = u * ax_hi; break;
            case Ctl::cash: x[i] = u * p.own->equity; break;
            case Ctl::maturity: x[i] = u; break;
            case Ctl::share:
            case Ctl::debt:
                x[i] = u * (std::isfinite(p.layout.hi[i]) ? p.layout.hi[i] : 1.0);
                break;
        }
    }
    project(p, x);
    return x;
}

}  // namespace

OptimizeResult optimize(const OptimizeSpec& spec, const objective::OwnParams& own,
                        const objective::CounterpartySnapshot& snapshot,
                        const returns::DrawMatrix& draws, const objective::ControlVector& base,
                        std::optional<objective::ControlVector> warm_start) {
    Problem prob = build_problem(spec, own, snapshot, base);
    if (prob.layout.dims() == 0)
        throw InfeasibleError("optimizer: no active controls");

    // Pre-check: the canonical feasible point (all equity in the external
    // asset, or the liquid buffer when the liquidity floor is active) must be
    // admissible, otherwise the configured set is empty.
    std::vector<double> x0 = canonical_start(prob);
    {
        const double tol = std::max(spec.tol_feas, 1e-12) * std::max(1.0, own.equity);
        if (!feasible_linear(prob, x0, tol)) {
            for (const HalfSpace& h : prob.planes) {
                double lhs = 0.0;
                for (std::size_t i = 0; i < x0.size(); ++i) lhs += h.a[i] * x0[i];
                if (lhs > h.b + tol)
                    throw InfeasibleError("optimizer: admissible set empty, canonical point violates " +
                                          h.name);
            }
            throw InfeasibleError("optimizer: admissible set empty, canonical point violates bounds");
        }
        const objective::ControlVector c0 = to_control(prob.layout, x0, base);
        if (prob.lc_violation(c0) > tol)
            throw InfeasibleError("optimizer: admissible set empty, canonical point violates LC");
    }

    const objective::PositionTable table(snapshot, own, draws);
    Evaluator ev;
    ev.prob = &prob;
    ev.table = &table;
    ev.threads = 1;

    const int n_starts = std::max(1, spec.multi_start);
    std::vector<std::vector<double>> starts;
    starts.push_back(x0);
    if (warm_start) {
        std::vector<double> xw(prob.layout.dims(), 0.0);
        for (std::size_t d = 0; d < prob.layout.dims(); ++d) {
            const Entry& e = prob.layout.entries[d];
            switch (e.kind) {
                case Ctl::external: xw[d] = warm_start->external_assets; break;
                case Ctl::cash: xw[d] = warm_start->cash; break;
                case Ctl::maturity: xw[d] = warm_start->maturity; break;
                case Ctl::share: xw[d] = warm_start->shares[e.j]; break;
                case Ctl::debt: xw[d] = warm_start->debts[e.j]; break;
            }
        }
        project(prob, xw);
        starts.push_back(std::move(xw));
    }
    while (static_cast<int>(starts.size()) < n_starts)
        starts.push_back(random_start(prob, spec.seed, static_cast<int>(starts.size())));

    auto solve_one = [&](const std::vector<double>& s) {
        if (!spec.liquidity_active) {
            Evaluator e = ev;
            return ascend(e, prob, s, spec.tol_obj, spec.max_iterations);
        }
        // Escalating quadratic penalty until the liquidity floor holds.
        StartOutcome out;
        std::vector<double> x = s;
        double w = 10.0;
        const double tol = spec.tol_feas * std::max(1.0, own.equity);
        for (int round = 0; round < 8; ++round) {
            Evaluator e = ev;
            e.penalty_weight = w;
            out = ascend(e, prob, x, spec.tol_obj, spec.max_iterations);
            x = out.x;
            const objective::ControlVector c = to_control(prob.layout, x, base);
            if (prob.lc_violation(c) <= tol) break;
            w *= 10.0;
        }
        out.f = ev.value(out.x);   // report the unpenalized objective
        return out;
    };

    std::vector<StartOutcome> outcomes(starts.size());
    const int workers = std::max(1, std::min<int>(spec.threads, static_cast<int>(starts.size())));
    if (workers <= 1) {
        for (std::size_t s = 0; s < starts.size(); ++s) outcomes[s] = solve_one(starts[s]);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t s = static_cast<std::size_t>(t); s < starts.size();
                     s += static_cast<std::size_t>(workers))
                    outcomes[s] = solve_one(starts[s]);
            });
        }
        for (auto& th : pool) th.join();
    }

    std::size_t best = 0;
    for (std::size_t s = 1; s < outcomes.size(); ++s)
        if (outcomes[s].f > outcomes[best].f) best = s;

    OptimizeResult res;
    res.control = to_control(prob.layout, outcomes[best].x, base);
    const auto eu = table.expected_utility(res.control, objective::UtilityKind::log_softplus,
                                           spec.threads);
    res.eu = eu.mean;
    res.eu_se = eu.se;
    res.implied_debt = objective::implied_debt(res.control, snapshot, own);
    res.converged = outcomes[best].converged;
    res.all_starts_converged = true;

    double ax_lo = kInf, ax_hi = -kInf, dl_lo = kInf, dl_hi = -kInf, om_lo = kInf, om_hi = -kInf;
    for (std::size_t s = 0; s < outcomes.size(); ++s) {
        const objective::ControlVector c = to_control(prob.layout, outcomes[s].x, base);
        StartReport r;
        r.index = static_cast<int>(s);
        r.eu = outcomes[s].f;
        r.external_assets = c.external_assets;
        r.implied_debt = objective::implied_debt(c, snapshot, own);
        r.maturity = c.maturity;
        r.converged = outcomes[s].converged;
        r.iterations = outcomes[s].iterations;
        res.starts.push_back(r);
        if (!r.converged) res.all_starts_converged = false;
        if (r.converged) {
            ax_lo = std::min(ax_lo, r.external_assets);
            ax_hi = std::max(ax_hi, r.external_assets);
            dl_lo = std::min(dl_lo, r.implied_debt);
            dl_hi = std::max(dl_hi, r.implied_debt);
            om_lo = std::min(om_lo, r.maturity);
            om_hi = std::max(om_hi, r.maturity);
        }
    }
    auto rel_spread = [](double lo, double hi) {
        if (!(hi >= lo)) return 0.0;
        return (hi - lo) / std::max({std::fabs(lo), std::fabs(hi), 1e-8});
    };
    res.spread_external = rel_spread(ax_lo, ax_hi);
    res.spread_debt = rel_spread(dl_lo, dl_hi);
    res.spread_maturity = rel_spread(om_lo, om_hi);

    // Binding-constraint report at the returned point.
    const double bind_tol = 1e-6 * std::max(own.equity, 1e-12);
    const std::vector<double>& xb = outcomes[best].x;
    for (const HalfSpace& h : prob.planes) {
        double lhs = 0.0;
        for (std::size_t i = 0; i < xb.size(); ++i) lhs += h.a[i] * xb[i];
        if (std::fabs(h.b - lhs) <= bind_tol) res.binding.push_back(h.name);
    }
    for (std::size_t d = 0; d < prob.layout.dims(); ++d) {
        const Entry& e = prob.layout.entries[d];
        std::string tag;
        switch (e.kind) {
            case Ctl::external: tag = "Ax"; break;
            case Ctl::cash: tag = "cash"; break;
            case Ctl::maturity: tag = "omega"; break;
            case Ctl::share: tag = "pi[" + std::to_string(snapshot[e.j].bank_index + 1) + "]"; break;
            case Ctl::debt: tag = "gamma[" + std::to_string(snapshot[e.j].bank_index + 1) + "]"; break;
        }
        if (std::fabs(xb[d] - prob.layout.lo[d]) <= bind_tol) res.binding.push_back(tag + "_lb");
        if (std::isfinite(prob.layout.hi[d]) && std::fabs(prob.layout.hi[d] - xb[d]) <= bind_tol)
            res.binding.push_back(tag + "_cap");
    }
    if (spec.liquidity_active) {
        const double debt = res.implied_debt;
        const double floor = objective::liquidity_requirement(res.control.maturity, debt,
                                                              spec.policy.weight_liquidity);
        if (std::fabs(res.control.cash - floor) <= bind_tol) res.binding.push_back("LC");
    }
    return res;
}

GridOracleResult grid_oracle(const OptimizeSpec& spec, const objective::OwnParams& own,
                             const objective::CounterpartySnapshot& snapshot,
                             const returns::DrawMatrix& draws,
                             const objective::ControlVector& base, std::size_t resolution) {
    Problem prob = build_problem(spec, own, snapshot, base);
    const std::size_t dims = prob.layout.dims();
    if (dims > 4)
        throw std::invalid_argument("grid_oracle: refusing more than 4 free controls");
    if (resolution == 0) throw std::invalid_argument("grid_oracle: resolution must be >= 1");

    const double k_ext = std::max(weight_external_of(spec.policy, spec.own_index), 1e-9);
    std::vector<std::vector<double>> axes(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        double lo = prob.layout.lo[d];
        double hi = prob.layout.hi[d];
        if (!std::isfinite(hi)) {
            switch (prob.layout.entries[d].kind) {
                case Ctl::external: hi = own.equity / k_ext; break;
                case Ctl::cash: hi = own.equity; break;
                default: hi = 1.0; break;
            }
        }
        axes[d].resize(resolution);
        for (std::size_t i = 0; i < resolution; ++i) {
            axes[d][i] = (resolution == 1)
                             ? lo
                             : lo + (hi - lo) * static_cast<double>(i) /
                                        static_cast<double>(resolution - 1);
        }
    }

    const objective::PositionTable table(snapshot, own, draws);
    const double tol = std::max(spec.tol_feas, 1e-12) * std::max(1.0, own.equity);

    std::size_t total = 1;
    for (std::size_t d = 0; d < dims; ++d) total *= resolution;

    struct ChunkBest {
        double eu = -kInf;
        std::size_t index = 0;
        std::size_t evaluated = 0;
    };
    const int workers = std::max(1, spec.threads);
    const std::size_t chunk = (total + static_cast<std::size_t>(workers) - 1) /
                              static_cast<std::size_t>(workers);
    std::vector<ChunkBest> bests(static_cast<std::size_t>(workers));

    auto run_chunk = [&](int w) {
        ChunkBest cb;
        std::vector<double> x(dims);
        const std::size_t lo = static_cast<std::size_t>(w) * chunk;
        const std::size_t hi = std::min(lo + chunk, total);
        for (std::size_t idx = lo; idx < hi; ++idx) {
            std::size_t rem = idx;
            for (std::size_t d = 0; d < dims; ++d) {
                x[d] = axes[d][rem % resolution];
                rem /= resolution;
            }
            if (!feasible_linear(prob, x, tol)) continue;
            const objective::ControlVector c = to_control(prob.layout, x, base);
            if (prob.lc_violation(c) > tol) continue;
            const double f =
                table.expected_utility(c, objective::UtilityKind::log_softplus, 1).mean;
            ++cb.evaluated;
            if (f > cb.eu) { cb.eu = f; cb.index = idx; }
        }
        bests[static_cast<std::size_t>(w)] = cb;
    };

    if (workers <= 1) {
        run_chunk(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_chunk, w);
        for (auto& th : pool) th.join();
    }

    ChunkBest overall;
    bool have_any = false;
    for (const ChunkBest& cb : bests) {
        overall.evaluated += cb.evaluated;
        if (cb.evaluated == 0) continue;
        if (!have_any || cb.eu > overall.eu ||
            (cb.eu == overall.eu && cb.index < overall.index)) {
            overall.eu = cb.eu;
            overall.index = cb.index;
            have_any = true;
        }
    }

    // The canonical point always participates, so resolution 1 still returns
    // a feasible corner.
    std::vector<double> x0 = canonical_start(prob);
    GridOracleResult res;
    bool have_grid_point = overall.evaluated > 0;
    double f0 = -kInf;
    if (feasible_linear(prob, x0, tol)) {
        const objective::ControlVector c0 = to_control(prob.layout, x0, base);
        if (prob.lc_violation(c0) <= tol) {
            f0 = table.expected_utility(c0, objective::UtilityKind::log_softplus, 1).mean;
            ++overall.evaluated;
        }
    }

    std::vector<double> xb;
    if (have_grid_point && overall.eu >= f0) {
        xb.resize(dims);
        std::size_t rem = overall.index;
        for (std::size_t d = 0; d < dims; ++d) {
            xb[d] = axes[d][rem % resolution];
            rem /= resolution;
        }
        res.eu = overall.eu;
    } else if (f0 > -kInf) {
        xb = x0;
        res.eu = f0;
    } else {
        throw InfeasibleError("grid_oracle: no feasible grid point");
    }
    res.control = to_control(prob.layout, xb, base);
    res.evaluated = overall.evaluated;

    Evaluator ev;
    ev.prob = &prob;
    ev.table = &table;
    std::vector<double> g;
    ev.value_grad(xb, g);
    double gap = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
        const double spacing =
            (resolution == 1) ? 0.0 : (axes[d].back() - axes[d].front()) /
                                          static_cast<double>(resolution - 1);
        gap += std::fabs(g[d]) * spacing;
    }
    res.gap_bound = gap;
    return res;
}

GreedyAllocation greedy_risk_neutral(const std::vector<GreedyAsset>& menu, double budget) {
    GreedyAllocation out;
    out.amounts.assign(menu.size(), 0.0);
    if (budget <= 0.0 || menu.empty()) return out;

    std::vector<std::size_t> order(menu.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ra = menu[a].expected_value / menu[a].weight;
        const double rb = menu[b].expected_value / menu[b].weight;
        if (ra != rb) return ra > rb;
        return a < b;
    });

    double remaining = budget;
    for (std::size_t idx : order) {
        const GreedyAsset& a = menu[idx];
        if (!(a.expected_value > 0.0)) break;   // nothing behind this one helps either
        const double affordable = remaining / a.weight;
        const double take = std::min(a.cap, affordable);
        if (take <= 0.0) continue;
        out.amounts[idx] = take;
        out.objective += take * a.expected_value;
        remaining -= take * a.weight;
        if (take < a.cap || remaining <= 0.0) {
            out.marginal = idx;
            if (remaining <= 0.0) break;
        }
        if (take < a.cap) break;   // budget bound before the cap
    }
    out.capital_used = budget - std::max(remaining, 0.0);
    return out;
}

bool kkt_interconnection_check(double df_dax, double df_dpi, double weight_external,
                               double weight_shares) {
    return df_dax / weight_external < df_dpi / weight_shares;
}

}  // namespace banknet::optimizer
