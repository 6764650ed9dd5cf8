#include "banknet/clearing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "banknet/linalg.hpp"

namespace banknet::clearing {

namespace {

std::vector<double> matured_debts(const Network& net) {
    std::vector<double> out(net.size());
    for (std::size_t i = 0; i < net.size(); ++i)
        out[i] = net.at(i).nominal_debt * (1.0 + net.at(i).debt_rate);
    return out;
}

double network_scale(const RealizedNetwork& rnet) {
    double total = 0.0;
    for (double a : rnet.asset_value) total += a;
    return std::max(1.0, total);
}

/// Solves the within-regime linear system. Returns false when the solution
/// contradicts the assumed regime (within tolerance).
bool solve_regime(const RealizedNetwork& rnet, const std::vector<Regime>& regime,
                  const std::vector<double>& matured, double tol_abs,
                  std::vector<double>& equity, std::vector<double>& debt) {
    const Network& net = *rnet.net;
    const std::size_t n = rnet.size();
    Matrix a(n, n, 0.0);
    std::vector<double> rhs(n, 0.0);
    const Matrix& pi = net.share_matrix();
    const Matrix& ga = net.debt_matrix();

    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = 1.0;
        double r = rnet.asset_value[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (regime[j] == Regime::solvent) {
                a(i, j) -= pi(i, j);          // unknown K_j
                r += ga(i, j) * matured[j];   // known L_j = L*_j(1+r_D)
            } else {
                a(i, j) -= ga(i, j);          // unknown L_j; K_j = 0
            }
        }
        if (regime[i] == Regime::solvent) r -= matured[i];
        rhs[i] = r;
    }

    std::vector<double> x;
    try {
        x = lu_solve(std::move(a), std::move(rhs));
    } catch (const std::runtime_error&) {
        equity.clear();
        debt.clear();
        return false;
    }

    equity.assign(n, 0.0);
    debt.assign(n, 0.0);
    bool consistent = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (regime[i] == Regime::solvent) {
            // strictly positive equity; a tie at zero belongs to the default regime
            if (!(x[i] > tol_abs)) consistent = false;
            equity[i] = std::max(x[i], 0.0);
            debt[i] = matured[i];
        } else {
            if (x[i] < -tol_abs || x[i] > matured[i] + tol_abs) consistent = false;
            equity[i] = 0.0;
            debt[i] = std::clamp(x[i], 0.0, matured[i]);
        }
    }
    return consistent;
}

}  // namespace

RealizedNetwork realize(const Network& net, const std::vector<double>& gross_returns) {
    if (gross_returns.size() != net.size())
        throw std::invalid_argument("realize: one gross return per institution required");
    RealizedNetwork r;
    r.net = &net;
    r.asset_value.resize(net.size());
    const double growth_rf = 1.0 + net.risk_free_rate();
    for (std::size_t i = 0; i < net.size(); ++i) {
        const Institution& b = net.at(i);
        r.asset_value[i] = b.external_assets * gross_returns[i] + b.cash * growth_rf;
    }
    return r;
}

double clearing_residual(const RealizedNetwork& rnet, const std::vector<double>& equity,
                         const std::vector<double>& debt_value) {
    const Network& net = *rnet.net;
    const std::size_t n = rnet.size();
    const std::vector<double> matured = matured_debts(net);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double assets = rnet.asset_value[i];
        for (std::size_t j = 0; j < n; ++j) {
            assets += net.share_matrix()(i, j) * equity[j];
            assets += net.debt_matrix()(i, j) * debt_value[j];
        }
        worst = std::max(worst, std::fabs(equity[i] - std::max(assets - matured[i], 0.0)));
        worst = std::max(worst, std::fabs(debt_value[i] - std::min(assets, matured[i])));
    }
    return worst;
}

ClearingResult clear_bruteforce(const RealizedNetwork& rnet, double tol) {
    const std::size_t n = rnet.size();
    if (n > 30) throw std::invalid_argument("clear_bruteforce: n too large for 2^n enumeration");
    const std::vector<double> matured = matured_debts(*rnet.net);
    const double tol_abs = tol * network_scale(rnet);

    std::vector<Regime> regime(n);
    std::vector<double> equity, debt;
    ClearingResult best_near;
    double best_bad = std::numeric_limits<double>::infinity();

    const std::uint64_t total = 1ULL << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        for (std::size_t i = 0; i < n; ++i)
            regime[i] = (mask >> i) & 1ULL ? Regime::defaulted : Regime::solvent;
        if (solve_regime(rnet, regime, matured, tol_abs, equity, debt)) {
            ClearingResult res;
            res.equity = equity;
            res.debt_value = debt;
            res.regime = regime;
            res.method = ClearingMethod::brute_force;
            res.regimes_tested = static_cast<int>(mask + 1);
            res.residual = clearing_residual(rnet, equity, debt);
            return res;
        }
        // keep the least-violating regime for the diagnostic error path
        if (!equity.empty()) {
            const double r = clearing_residual(rnet, equity, debt);
            if (r < best_bad) {
                best_bad = r;
                best_near.equity = equity;
                best_near.debt_value = debt;
                best_near.regime = regime;
                best_near.residual = r;
            }
        }
    }
    throw std::runtime_error("clear_bruteforce: no sign-consistent regime (best residual " +
                             std::to_string(best_bad) + ")");
}

ClearingResult clear_heuristic(const RealizedNetwork& rnet, double tol) {
    const std::size_t n = rnet.size();
    const std::vector<double> matured = matured_debts(*rnet.net);
    const double tol_abs = tol * network_scale(rnet);

    // w_i = (assets - L*(1+r_D)) / L*(1+r_D); positive weight pins solvency.
    std::vector<double> w(n);
    std::vector<std::size_t> free_set;   // w_i <= 0, may default
    for (std::size_t i = 0; i < n; ++i) {
        const double denom = std::max(matured[i], 1e-300);
        w[i] = (rnet.asset_value[i] - matured[i]) / denom;
        if (!(w[i] > 0.0)) free_set.push_back(i);
    }
    // ascending |w| so subset sums enumerate in ascending order
    std::sort(free_set.begin(), free_set.end(), [&](std::size_t a, std::size_t b) {
        const double wa = std::fabs(w[a]), wb = std::fabs(w[b]);
        if (wa != wb) return wa < wb;
        return a < b;
    });
    const std::size_t f = free_set.size();
    if (f > 62) throw std::invalid_argument("clear_heuristic: free set too large");

    std::vector<Regime> regime(n);
    std::vector<double> equity, debt;
    int tested = 0;

    auto try_subset = [&](std::uint64_t flip_mask) -> bool {
        // flipped members of the free set become solvent; the rest default
        for (std::size_t i = 0; i < n; ++i) regime[i] = Regime::solvent;
        for (std::size_t k = 0; k < f; ++k)
            if (!((flip_mask >> k) & 1ULL)) regime[free_set[k]] = Regime::defaulted;
        ++tested;
        return solve_regime(rnet, regime, matured, tol_abs, equity, debt);
    };

    struct Node {
        double flip_cost;        // 2 * sum of |w| over flipped members
        std::size_t defaults;    // free members left in default
        std::uint64_t mask;
        std::size_t last;        // highest flipped slot + 1 (0 when empty)
    };
    auto later = [&](const Node& a, const Node& b) {
        if (a.flip_cost != b.flip_cost) return a.flip_cost > b.flip_cost;
        if (a.defaults != b.defaults) return a.defaults > b.defaults;
        return a.mask > b.mask;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(later)> heap(later);
    heap.push({0.0, f, 0ULL, 0});

    bool found = false;
    while (!heap.empty()) {
        const Node cur = heap.top();
        heap.pop();
        if (try_subset(cur.mask)) { found = true; break; }
        // successors: extend by the next slot, or advance the last slot
        if (cur.last < f) {
            Node ext = cur;
            ext.mask |= (1ULL << cur.last);
            ext.flip_cost += 2.0 * std::fabs(w[free_set[cur.last]]);
            ext.defaults = cur.defaults - 1;
            ext.last = cur.last + 1;
            heap.push(ext);
            if (cur.last > 0 && ((cur.mask >> (cur.last - 1)) & 1ULL)) {
                Node swp = cur;
                swp.mask &= ~(1ULL << (cur.last - 1));
                swp.mask |= (1ULL << cur.last);
                swp.flip_cost += 2.0 * (std::fabs(w[free_set[cur.last]]) -
                                        std::fabs(w[free_set[cur.last - 1]]));
                swp.last = cur.last + 1;
                heap.push(swp);
            }
        }
    }

    if (found) {
        ClearingResult res;
        res.equity = equity;
        res.debt_value = debt;
        res.regime = regime;
        res.method = ClearingMethod::heuristic;
        res.regimes_tested = tested;
        res.residual = clearing_residual(rnet, equity, debt);
        return res;
    }
    ClearingResult res = clear_fixed_point(rnet);
    res.regimes_tested = tested;
    return res;
}

ClearingResult clear_fixed_point(const RealizedNetwork& rnet, int max_iter, double tol) {
    const Network& net = *rnet.net;
    const std::size_t n = rnet.size();
    const std::vector<double> matured = matured_debts(net);

    std::vector<double> equity(n), debt(n), eq_next(n), db_next(n);
    for (std::size_t i = 0; i < n; ++i) {
        equity[i] = std::max(rnet.asset_value[i] - matured[i], 0.0);
        debt[i] = std::min(rnet.asset_value[i], matured[i]);
    }

    int it = 0;
    double delta = 0.0;
    for (; it < max_iter; ++it) {
        delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double assets = rnet.asset_value[i];
            for (std::size_t j = 0; j < n; ++j) {
                assets += net.share_matrix()(i, j) * equity[j];
                assets += net.debt_matrix()(i, j) * debt[j];
            }
            eq_next[i] = std::max(assets - matured[i], 0.0);
            db_next[i] = std::min(assets, matured[i]);
            delta = std::max(delta, std::fabs(eq_next[i] - equity[i]));
            delta = std::max(delta, std::fabs(db_next[i] - debt[i]));
        }
        equity.swap(eq_next);
        debt.swap(db_next);
        if (delta < tol) { ++it; break; }
    }
    if (delta >= tol)
        throw std::runtime_error("clear_fixed_point: no convergence after " +
                                 std::to_string(max_iter) + " iterations, last delta " +
                                 std::to_string(delta));

    ClearingResult res;
    res.equity = equity;
    res.debt_value = debt;
    res.regime.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        res.regime[i] = equity[i] > 0.0 ? Regime::solvent : Regime::defaulted;
    res.method = ClearingMethod::fixed_point;
    res.iterations = it;
    res.residual = clearing_residual(rnet, equity, debt);
    return res;
}

}  // namespace banknet::clearing
