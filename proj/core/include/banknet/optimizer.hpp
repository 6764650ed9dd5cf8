#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "banknet/domain.hpp"
#include "banknet/objective.hpp"
#include "banknet/returns.hpp"

namespace banknet::optimizer {

/// Which controls the solver may move and how hard it tries. The reduced
/// setting frees Ax and the holdings only; the liquidity constraint is
/// active exactly when cash is a live control (with cash pinned at zero it
/// could never hold).
struct OptimizeSpec {
    bool free_external = true;
    bool free_cash = false;
    bool free_maturity = false;
    bool free_shares = true;
    bool free_debts = true;
    bool liquidity_active = false;

    RegulatoryPolicy policy;
    std::size_t own_index = 0;       // row of the policy vectors for this bank

    std::size_t draw_count = 100000;
    std::uint64_t seed = 0;
    double tol_obj = 1e-7;
    double tol_feas = 1e-9;
    int multi_start = 8;
    int max_iterations = 5000;
    int threads = 1;
};

class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StartReport {
    int index = 0;
    double eu = 0.0;
    double external_assets = 0.0;
    double implied_debt = 0.0;
    double maturity = 0.0;
    bool converged = false;
    int iterations = 0;
};

struct OptimizeResult {
    objective::ControlVector control;
    double eu = 0.0;
    double eu_se = 0.0;
    double implied_debt = 0.0;
    std::vector<std::string> binding;    // constraints with |slack| <= 1e-6 * K^(0)
    bool converged = false;
    bool all_starts_converged = false;
    double spread_external = 0.0;        // relative spread across converged starts
    double spread_debt = 0.0;
    double spread_maturity = 0.0;
    std::vector<StartReport> starts;
};

/// Maximizes the Monte-Carlo expected utility over the admissible set
/// (SC, optional LC, box bounds, nonnegative implied debt, optional
/// large-exposure rows). Projected gradient ascent with analytic gradients
/// and Barzilai-Borwein steps; multi-start with a deterministic argmax
/// merge. Fixed controls keep their `base` values.
OptimizeResult optimize(const OptimizeSpec& spec, const objective::OwnParams& own,
                        const objective::CounterpartySnapshot& snapshot,
                        const returns::DrawMatrix& draws,
                        const objective::ControlVector& base,
                        std::optional<objective::ControlVector> warm_start = std::nullopt);

struct GridOracleResult {
    objective::ControlVector control;
    double eu = 0.0;
    std::size_t evaluated = 0;
    double gap_bound = 0.0;   // |grad|_1 * spacing at the best grid point
};

/// Exhaustive evaluation over an admissible grid with the same CRN draws.
/// Refuses more than four free controls.
GridOracleResult grid_oracle(const OptimizeSpec& spec, const objective::OwnParams& own,
                             const objective::CounterpartySnapshot& snapshot,
                             const returns::DrawMatrix& draws,
                             const objective::ControlVector& base, std::size_t resolution);

/// One row of the risk-neutral greedy menu: expected end-of-period value
/// per unit held, regulatory capital consumed per unit, and the holding
/// cap (infinity when uncapped).
struct GreedyAsset {
    double expected_value = 0.0;
    double weight = 1.0;
    double cap = 0.0;
};

struct GreedyAllocation {
    std::vector<double> amounts;
    double objective = 0.0;
    double capital_used = 0.0;
    std::optional<std::size_t> marginal;   // the cut asset, if capacity bound
};

/// Risk-neutral allocator: sort by expected value over regulatory weight,
/// fill to cap in order until the budget is exhausted. Ties break on the
/// lowest asset index; assets with non-positive value stay empty.
GreedyAllocation greedy_risk_neutral(const std::vector<GreedyAsset>& menu, double budget);

/// Boundary test: pi = 0 cannot be optimal when the weighted
/// marginal utility of the holding beats that of the external asset.
bool kkt_interconnection_check(double df_dax, double df_dpi, double weight_external,
                               double weight_shares);

}  // namespace banknet::optimizer
