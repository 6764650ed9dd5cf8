#include "banknet/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "banknet/clearing.hpp"
#include "banknet/config.hpp"
#include "banknet/csv.hpp"
#include "banknet/formation.hpp"
#include "banknet/optimizer.hpp"
#include "banknet/pricing.hpp"
#include "banknet/returns.hpp"
#include "banknet/rng.hpp"
#include "banknet/welfare.hpp"

namespace banknet::cli {

namespace {

namespace fs = std::filesystem;
using config::Ini;
using config::SchemaError;

struct WeightCell {
    double k_pi = 0.0;
    double k_ext = 0.0;
    double k_gamma = 0.0;
};

struct Setup {
    std::size_t n = 0;
    std::vector<double> equity;
    std::vector<double> debt_rate;
    std::vector<double> maturity;
    std::vector<double> cash;

    double base_net_return = 0.01;
    double prob_default = 0.001;
    double target_leverage = 0.91;

    std::vector<WeightCell> cells;
    std::vector<double> rhos;
    double weight_liquidity = 0.1;
    double cap_shares = 1.0;
    double cap_debt = 1.0;
    std::optional<double> exposure_limit;

    std::size_t draws = 100000;
    std::uint64_t seed = 42;
    int multi_start = 8;
    int max_rounds = 20;
    double conv_tol = 0.01;
    double tol_obj = 1e-7;
    double tol_feas = 1e-9;
    formation::KappaMode kappa = formation::KappaMode::one;
    double counterparty_assets = 10.0;   // <= 0 means "run the no-interconnection step"
    double risk_free_rate = 0.0;

    double deposit_cost = 0.0;
    std::size_t welfare_draws = 100000;
    welfare::WelfareVariant variant = welfare::WelfareVariant::formula;

    int threads = 1;
};

std::vector<double> broadcast(std::vector<double> v, std::size_t n, const std::string& path) {
    if (v.size() == 1) v.assign(n, v[0]);
    if (v.size() != n)
        throw SchemaError(path + ": expected 1 or " + std::to_string(n) + " values");
    return v;
}

void check_range(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw SchemaError(path + ": " + what);
}

Setup load_setup(const Ini& ini, const RunOptions& opts) {
    Setup s;
    s.threads = std::max(1, opts.threads);

    const long long count = ini.get_int("banks", "count", 2);
    check_range(count >= 1 && count <= 64, "[banks].count", "must be in [1, 64]");
    s.n = static_cast<std::size_t>(count);

    auto vec = [&](const char* key, double fallback) {
        std::vector<double> v = ini.get_doubles("banks", key);
        if (v.empty()) v = {fallback};
        return broadcast(std::move(v), s.n, std::string("[banks].") + key);
    };
    s.equity = vec("equity", 1.0);
    s.debt_rate = vec("debt_rate", 0.0);
    s.maturity = vec("maturity", 1.0);
    s.cash = vec("cash", 0.0);
    for (std::size_t i = 0; i < s.n; ++i) {
        check_range(s.equity[i] > 0.0, "[banks].equity", "must be > 0");
        check_range(s.debt_rate[i] >= 0.0, "[banks].debt_rate", "must be >= 0");
        check_range(s.maturity[i] >= 0.0 && s.maturity[i] <= 1.0, "[banks].maturity",
                    "must be in [0,1]");
        check_range(s.cash[i] >= 0.0, "[banks].cash", "must be >= 0");
    }

    s.base_net_return = ini.get_double("returns", "base_net_return", 0.01);
    s.prob_default = ini.get_double("returns", "prob_default", 0.001);
    s.target_leverage = ini.get_double("returns", "target_leverage", 0.91);
    check_range(s.prob_default > 0.0 && s.prob_default <= 0.5, "[returns].prob_default",
                "must be in (0, 0.5]");
    check_range(s.target_leverage > 0.0 && s.target_leverage < 1.0, "[returns].target_leverage",
                "must be in (0, 1)");

    if (ini.has("policy.grid", "weight_sets")) {
        std::istringstream in(ini.require("policy.grid", "weight_sets"));
        std::string tok;
        std::vector<double> gammas = ini.get_doubles("policy.grid", "weight_debt");
        std::size_t idx = 0;
        while (in >> tok) {
            WeightCell c;
            const auto c1 = tok.find(':');
            if (c1 == std::string::npos)
                throw SchemaError("[policy.grid].weight_sets: expected k_pi:k_ext pairs");
            c.k_pi = config::parse_double(tok.substr(0, c1), "[policy.grid].weight_sets");
            c.k_ext = config::parse_double(tok.substr(c1 + 1), "[policy.grid].weight_sets");
            if (gammas.empty()) c.k_gamma = 0.04;
            else c.k_gamma = gammas[std::min(idx, gammas.size() - 1)];
            s.cells.push_back(c);
            ++idx;
        }
    }
    if (s.cells.empty())
        s.cells.push_back({ini.get_double("policy.grid", "weight_shares", 0.232),
                           ini.get_double("policy.grid", "weight_external", 0.06),
                           ini.get_double("policy.grid", "weight_debt", 0.04)});
    for (const WeightCell& c : s.cells) {
        check_range(c.k_pi > 0.0 && c.k_pi < 1.0, "[policy.grid].weight_sets", "k_pi in (0,1)");
        check_range(c.k_ext > 0.0 && c.k_ext < 1.0, "[policy.grid].weight_sets", "k_ext in (0,1)");
        check_range(c.k_gamma > 0.0 && c.k_gamma < 1.0, "[policy.grid].weight_debt",
                    "must be in (0,1)");
    }

    s.rhos = ini.get_doubles("policy.grid", "rho");
    if (s.rhos.empty()) s.rhos = {-0.9};
    for (double r : s.rhos)
        check_range(r >= -1.0 && r <= 1.0, "[policy.grid].rho", "must be in [-1,1]");

    s.weight_liquidity = ini.get_double("policy.grid", "weight_liquidity", 0.1);
    check_range(s.weight_liquidity > 0.0 && s.weight_liquidity < 1.0,
                "[policy.grid].weight_liquidity", "must be in (0,1)");
    s.cap_shares = ini.get_double("policy.grid", "float_cap_shares", 1.0);
    s.cap_debt = ini.get_double("policy.grid", "float_cap_debt", 1.0);
    check_range(s.cap_shares >= 0.0 && s.cap_shares <= 1.0, "[policy.grid].float_cap_shares",
                "must be in [0,1]");
    check_range(s.cap_debt >= 0.0 && s.cap_debt <= 1.0, "[policy.grid].float_cap_debt",
                "must be in [0,1]");
    if (ini.has("policy.grid", "large_exposure_limit")) {
        const double lim = ini.require_double("policy.grid", "large_exposure_limit");
        check_range(lim > 0.0 && lim <= 1.0, "[policy.grid].large_exposure_limit",
                    "must be in (0,1]");
        s.exposure_limit = lim;
    }

    s.draws = static_cast<std::size_t>(ini.get_int("simulation", "draws", 100000));
    s.seed = static_cast<std::uint64_t>(ini.get_int("simulation", "seed", 42));
    s.multi_start = static_cast<int>(ini.get_int("simulation", "multi_start", 8));
    s.max_rounds = static_cast<int>(ini.get_int("simulation", "max_rounds", 20));
    s.conv_tol = ini.get_double("simulation", "conv_tol", 0.01);
    s.tol_obj = ini.get_double("simulation", "tol_obj", 1e-7);
    s.tol_feas = ini.get_double("simulation", "tol_feas", 1e-9);
    s.counterparty_assets = ini.get_double("simulation", "counterparty_assets", 10.0);
    s.risk_free_rate = ini.get_double("simulation", "risk_free_rate", 0.0);
    check_range(s.draws >= 1, "[simulation].draws", "must be >= 1");
    check_range(s.multi_start >= 1, "[simulation].multi_start", "must be >= 1");
    check_range(s.conv_tol > 0.0, "[simulation].conv_tol", "must be > 0");
    const std::string kappa = ini.get("simulation", "kappa", "one");
    if (kappa == "one") s.kappa = formation::KappaMode::one;
    else if (kappa == "general") s.kappa = formation::KappaMode::general;
    else throw SchemaError("[simulation].kappa: must be 'one' or 'general'");

    if (opts.seed) s.seed = *opts.seed;
    if (opts.draws) s.draws = *opts.draws;

    s.deposit_cost = ini.get_double("welfare", "deposit_cost", 0.0);
    check_range(s.deposit_cost >= 0.0 && s.deposit_cost <= 0.6, "[welfare].deposit_cost",
                "must be in [0, 0.6]");
    s.welfare_draws = static_cast<std::size_t>(
        ini.get_int("welfare", "draws", static_cast<long long>(s.draws)));
    const std::string variant = ini.get("welfare", "variant", "formula");
    if (variant == "formula") s.variant = welfare::WelfareVariant::formula;
    else if (variant == "prose") s.variant = welfare::WelfareVariant::prose;
    else throw SchemaError("[welfare].variant: must be 'formula' or 'prose'");
    return s;
}

const std::set<std::string> kBanksKeys = {"count", "equity", "debt_rate", "maturity", "cash"};
const std::set<std::string> kReturnsKeys = {"base_net_return", "prob_default", "target_leverage"};
const std::set<std::string> kGridKeys = {"weight_sets", "weight_shares", "weight_external",
                                         "weight_debt", "rho", "weight_liquidity",
                                         "float_cap_shares", "float_cap_debt",
                                         "large_exposure_limit"};
const std::set<std::string> kSimKeys = {"draws", "seed", "multi_start", "max_rounds", "conv_tol",
                                        "tol_obj", "tol_feas", "kappa", "counterparty_assets",
                                        "risk_free_rate"};
const std::set<std::string> kWelfareKeys = {"deposit_cost", "draws", "variant"};
const std::set<std::string> kNetworkKeys = {"risk_free_rate", "institution", "pi_row", "gamma_row"};
const std::set<std::string> kShocksKeys = {"gross", "draws", "rho", "seed"};

std::map<std::string, std::set<std::string>> allowed_for(const std::string& command) {
    std::map<std::string, std::set<std::string>> m;
    if (command == "clear") {
        m["network"] = kNetworkKeys;
        m["shocks"] = kShocksKeys;
        m["returns"] = kReturnsKeys;
        m["banks"] = kBanksKeys;
        m["simulation"] = kSimKeys;
        return m;
    }
    m["banks"] = kBanksKeys;
    m["returns"] = kReturnsKeys;
    m["policy.grid"] = kGridKeys;
    m["simulation"] = kSimKeys;
    m["welfare"] = kWelfareKeys;
    return m;
}

RegulatoryPolicy make_policy(const Setup& s, const WeightCell& c) {
    RegulatoryPolicy p = RegulatoryPolicy::uniform(s.n, c.k_ext, c.k_pi, c.k_gamma,
                                                   s.weight_liquidity, s.cap_shares, s.cap_debt);
    p.large_exposure_limit = s.exposure_limit;
    return p;
}

returns::CalibrationTarget target_for(const Setup& s, std::size_t bank) {
    returns::CalibrationTarget t;
    t.mean_net_return = returns::expected_net_return(s.debt_rate[bank], s.target_leverage,
                                                     s.base_net_return);
    t.prob_default = s.prob_default;
    t.leverage_ratio = s.target_leverage;
    return t;
}

Matrix correlation_for(const Setup& s, double rho) {
    Matrix c(s.n, s.n, rho);
    for (std::size_t i = 0; i < s.n; ++i) c(i, i) = 1.0;
    return c;
}

ReturnModel model_for(const Setup& s, double rho) {
    ReturnModel m;
    m.log_mean.resize(s.n);
    m.log_vol.resize(s.n);
    for (std::size_t i = 0; i < s.n; ++i) {
        const auto cal = returns::calibrate(target_for(s, i));
        m.log_mean[i] = cal.log_mean;
        m.log_vol[i] = cal.log_vol;
    }
    m.correlation = correlation_for(s, rho);
    return m;
}

std::string fmt(double v) { return csv::format_double(v); }

std::string join_fractions(const std::vector<double>& row, std::size_t self,
                           double suppress_below = 0.0, double scale = 1.0) {
    std::string out;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (j == self) continue;
        double v = row[j];
        if (std::fabs(v) < suppress_below) v = 0.0;
        if (!out.empty()) out += ';';
        out += fmt(scale * v);
    }
    return out;
}

std::string join_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += fmt(v[i]);
    }
    return out;
}

std::string join_names(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += v[i];
    }
    return out.empty() ? "-" : out;
}

void write_manifest(const fs::path& dir, const RunOptions& opts, const std::string& config_text,
                    const Setup* s) {
    std::ostringstream out;
    out << "command=" << opts.command << "\n";
    out << "config_fnv1a=" << csv::hex64(csv::fnv1a64(config_text)) << "\n";
    out << "version=" << kVersion << "\n";
    if (s) {
        out << "seed=" << s->seed << "\n";
        out << "draws=" << s->draws << "\n";
        if (opts.command == "welfare") out << "welfare_draws=" << s->welfare_draws << "\n";
    }
    csv::write_file((dir / "manifest.txt").string(), out.str());
}

// ---- commands -------------------------------------------------------------

int cmd_calibrate(const Setup& s, const fs::path& dir, std::ostringstream& report) {
    csv::Table t({"bank", "mean_net_return", "prob_default", "leverage", "mu", "sigma"});
    for (std::size_t i = 0; i < s.n; ++i) {
        const auto target = target_for(s, i);
        const auto cal = returns::calibrate(target);
        t.add_row({std::to_string(i + 1), fmt(target.mean_net_return), fmt(target.prob_default),
                   fmt(target.leverage_ratio), fmt(cal.log_mean), fmt(cal.log_vol)});
    }
    csv::write_file((dir / "calibrate.csv").string(), t.str());
    report << "calibrated " << s.n << " banks\n";
    return 0;
}

struct SingleCellResult {
    optimizer::OptimizeResult opt;
    double price_equity = 0.0;
    double price_debt = 0.0;
    double counterparty_ax = 0.0;
    double counterparty_debt = 0.0;
};

SingleCellResult optimize_single_cell(const Setup& s, const WeightCell& cell, double rho) {
    if (s.n != 2)
        throw SchemaError("[banks].count: optimize-single is a two-bank experiment");
    const ReturnModel model = model_for(s, rho);
    const returns::DrawMatrix draws = returns::sample_gross_returns(model, s.draws, s.seed);
    const RegulatoryPolicy policy = make_policy(s, cell);

    SingleCellResult out;
    // counterparty: bank 1 with pinned external assets, or its own
    // no-interconnection optimum when none is configured
    double cp_ax = s.counterparty_assets;
    if (!(cp_ax > 0.0)) {
        optimizer::OptimizeSpec spec0;
        spec0.free_external = true;
        spec0.free_shares = false;
        spec0.free_debts = false;
        spec0.policy = policy;
        spec0.own_index = 0;
        spec0.draw_count = s.draws;
        spec0.seed = derive_seed(s.seed, 11);
        spec0.multi_start = s.multi_start;
        spec0.tol_obj = s.tol_obj;
        spec0.tol_feas = s.tol_feas;
        spec0.threads = s.threads;
        objective::OwnParams own0;
        own0.bank_index = 0;
        own0.equity = s.equity[0];
        own0.risk_free_rate = s.risk_free_rate;
        own0.debt_rate = s.debt_rate[0];
        objective::ControlVector base0;
        base0.cash = s.cash[0];
        base0.maturity = s.maturity[0];
        const auto r0 = optimizer::optimize(spec0, own0, {}, draws, base0);
        cp_ax = r0.control.external_assets;
    }
    const double cp_debt = cp_ax + s.cash[0] - s.equity[0];
    if (cp_debt < 0.0)
        throw SchemaError("[simulation].counterparty_assets: implies negative counterparty debt");

    Institution proxy;
    proxy.external_assets = cp_ax;
    proxy.cash = s.cash[0];
    proxy.nominal_debt = cp_debt;
    proxy.debt_rate = s.debt_rate[0];
    const double kap = s.kappa == formation::KappaMode::one
                           ? 1.0
                           : (cp_debt + s.equity[0]) / std::max(cp_ax + s.cash[0], 1e-300);
    const auto prices =
        pricing::market_values(proxy, model.log_mean[0], model.log_vol[0], kap, s.risk_free_rate);

    objective::Counterparty c;
    c.bank_index = 0;
    c.kappa = kap;
    c.external_assets = cp_ax;
    c.cash = s.cash[0];
    c.nominal_debt = cp_debt;
    c.debt_rate = s.debt_rate[0];
    c.price_equity = prices.market_equity;
    c.price_debt = prices.market_debt;

    optimizer::OptimizeSpec spec;
    spec.policy = policy;
    spec.own_index = 1;
    spec.draw_count = s.draws;
    spec.seed = derive_seed(s.seed, 13);
    spec.multi_start = s.multi_start;
    spec.tol_obj = s.tol_obj;
    spec.tol_feas = s.tol_feas;
    spec.threads = s.threads;

    objective::OwnParams own;
    own.bank_index = 1;
    own.equity = s.equity[1];
    own.risk_free_rate = s.risk_free_rate;
    own.debt_rate = s.debt_rate[1];

    objective::ControlVector base;
    base.cash = s.cash[1];
    base.maturity = s.maturity[1];
    base.shares = {0.0};
    base.debts = {0.0};

    out.opt = optimizer::optimize(spec, own, {c}, draws, base);
    out.price_equity = prices.market_equity;
    out.price_debt = prices.market_debt;
    out.counterparty_ax = cp_ax;
    out.counterparty_debt = cp_debt;
    return out;
}

int cmd_optimize_single(const Setup& s, const fs::path& dir, std::ostringstream& report) {
    csv::Table t({"k_pi", "k_ext", "k_gamma", "rho", "external_assets", "pi", "pi_pct", "gamma",
                  "gamma_pct", "implied_debt", "iba_ta", "iba_ta_pct", "eu", "eu_se", "binding",
                  "converged", "all_starts_converged", "spread_external", "spread_debt"});
    for (const WeightCell& cell : s.cells) {
        for (double rho : s.rhos) {
            const auto r = optimize_single_cell(s, cell, rho);
            const double pi = r.opt.control.shares[0];
            const double ga = r.opt.control.debts[0];
            const double iba = pi * r.price_equity + ga * r.price_debt;
            const double ta = r.opt.control.external_assets + r.opt.control.cash + iba;
            const double iba_ta = ta > 0.0 ? iba / ta : 0.0;
            t.add_row({fmt(cell.k_pi), fmt(cell.k_ext), fmt(cell.k_gamma), fmt(rho),
                       fmt(r.opt.control.external_assets), fmt(pi), fmt(100.0 * pi), fmt(ga),
                       fmt(100.0 * ga), fmt(r.opt.implied_debt), fmt(iba_ta), fmt(100.0 * iba_ta),
                       fmt(r.opt.eu), fmt(r.opt.eu_se), join_names(r.opt.binding),
                       r.opt.converged ? "1" : "0", r.opt.all_starts_converged ? "1" : "0",
                       fmt(r.opt.spread_external), fmt(r.opt.spread_debt)});
            report << "cell k_pi=" << cell.k_pi << " k_ext=" << cell.k_ext << " rho=" << rho
                   << ": Ax=" << r.opt.control.external_assets << " pi=" << pi << " gamma=" << ga
                   << "\n";
        }
    }
    csv::write_file((dir / "optimize_single.csv").string(), t.str());
    return 0;
}

formation::FormationResult form_cell(const Setup& s, const WeightCell& cell, double rho) {
    std::vector<formation::BankSetup> banks(s.n);
    for (std::size_t i = 0; i < s.n; ++i) {
        banks[i].equity = s.equity[i];
        banks[i].debt_rate = s.debt_rate[i];
        banks[i].maturity = s.maturity[i];
        banks[i].cash = s.cash[i];
        banks[i].calibration = target_for(s, i);
    }
    formation::FormationConfig cfg;
    cfg.policy = make_policy(s, cell);
    cfg.correlation = correlation_for(s, rho);
    cfg.risk_free_rate = s.risk_free_rate;
    cfg.draw_count = s.draws;
    cfg.seed = s.seed;
    cfg.max_rounds = s.max_rounds;
    cfg.conv_tol = s.conv_tol;
    cfg.kappa = s.kappa;
    cfg.multi_start = s.multi_start;
    cfg.tol_obj = s.tol_obj;
    cfg.tol_feas = s.tol_feas;
    cfg.threads = s.threads;
    return formation::form_network(banks, cfg);
}

int cmd_form(const Setup& s, const fs::path& dir, std::ostringstream& report) {
    csv::Table banks({"k_pi", "k_ext", "k_gamma", "rho", "bank", "external_assets", "cash",
                      "nominal_debt", "equity", "pi", "pi_pct", "gamma", "gamma_pct", "iba_ta",
                      "iba_ta_pct", "rounds", "converged", "bc_residual"});
    csv::Table traj({"k_pi", "k_ext", "k_gamma", "rho", "round", "step", "bank",
                     "external_assets", "implied_debt", "pi", "gamma", "eu", "max_rel_change"});
    for (const WeightCell& cell : s.cells) {
        for (double rho : s.rhos) {
            const auto r = form_cell(s, cell, rho);
            const Network& net = r.network;
            for (std::size_t i = 0; i < s.n; ++i) {
                const Institution& b = net.at(i);
                // interbank assets at the final prices
                double iba = 0.0;
                for (std::size_t j = 0; j < s.n; ++j) {
                    if (j == i) continue;
                    Institution proxy = net.at(j);
                    const double kap =
                        s.kappa == formation::KappaMode::one
                            ? 1.0
                            : (proxy.nominal_debt + proxy.equity_book) /
                                  std::max(proxy.external_assets + proxy.cash, 1e-300);
                    const auto prices = pricing::market_values(proxy, r.log_mean[j], r.log_vol[j],
                                                               kap, s.risk_free_rate);
                    iba += b.shares_held[j] * prices.market_equity;
                    iba += b.debt_held[j] * prices.market_debt;
                }
                const double ta = b.external_assets + b.cash + iba;
                const double iba_ta = ta > 0.0 ? iba / ta : 0.0;
                // gamma values below 1e-3 carry no economic meaning
                banks.add_row({fmt(cell.k_pi), fmt(cell.k_ext), fmt(cell.k_gamma), fmt(rho),
                               std::to_string(i + 1), fmt(b.external_assets), fmt(b.cash),
                               fmt(b.nominal_debt), fmt(b.equity_book),
                               join_fractions(b.shares_held, i),
                               join_fractions(b.shares_held, i, 0.0, 100.0),
                               join_fractions(b.debt_held, i, 1e-3),
                               join_fractions(b.debt_held, i, 1e-3, 100.0),
                               fmt(iba_ta), fmt(100.0 * iba_ta), std::to_string(r.rounds),
                               r.converged ? "1" : "0", fmt(r.bc_residual[i])});
            }
            for (const auto& rec : r.trajectory) {
                traj.add_row({fmt(cell.k_pi), fmt(cell.k_ext), fmt(cell.k_gamma), fmt(rho),
                              std::to_string(rec.round), std::to_string(rec.step),
                              std::to_string(rec.bank + 1), fmt(rec.control.external_assets),
                              fmt(rec.implied_debt),
                              join_fractions(rec.control.shares, static_cast<std::size_t>(rec.bank)),
                              join_fractions(rec.control.debts, static_cast<std::size_t>(rec.bank)),
                              fmt(rec.eu), fmt(rec.max_rel_change)});
            }
            report << "cell k_pi=" << cell.k_pi << " k_ext=" << cell.k_ext << " rho=" << rho
                   << ": rounds=" << r.rounds << (r.converged ? " converged" : " NOT converged")
                   << "\n";
        }
    }
    csv::write_file((dir / "form.csv").string(), banks.str());
    csv::write_file((dir / "form_trajectory.csv").string(), traj.str());
    return 0;
}

int cmd_welfare(const Setup& s, const fs::path& dir, std::ostringstream& report) {
    csv::Table t({"k_pi", "k_ext", "k_gamma", "rho", "deposit_cost", "variant", "welfare",
                  "welfare_pct", "welfare_se", "sum_contributions", "sum_contributions_se",
                  "contributions", "defaults_observed", "draws", "seed"});
    std::size_t cell_index = 0;
    for (const WeightCell& cell : s.cells) {
        for (double rho : s.rhos) {
            const auto formed = form_cell(s, cell, rho);
            ReturnModel model;
            model.log_mean = formed.log_mean;
            model.log_vol = formed.log_vol;
            model.correlation = correlation_for(s, rho);
            const std::uint64_t wseed = derive_seed(s.seed, 0x57454C46ULL + cell_index);
            const auto rep = welfare::evaluate_welfare(formed.network, model, s.deposit_cost,
                                                       s.welfare_draws, wseed, s.variant,
                                                       s.threads);
            t.add_row({fmt(cell.k_pi), fmt(cell.k_ext), fmt(cell.k_gamma), fmt(rho),
                       fmt(rep.deposit_cost),
                       s.variant == welfare::WelfareVariant::formula ? "formula" : "prose",
                       fmt(rep.welfare), fmt(100.0 * rep.welfare), fmt(rep.welfare_se),
                       fmt(rep.sum_contributions), fmt(rep.sum_contributions_se),
                       join_list(rep.contributions), std::to_string(rep.defaults_observed),
                       std::to_string(rep.draws_used), std::to_string(rep.seed)});
            report << "cell k_pi=" << cell.k_pi << " k_ext=" << cell.k_ext << " rho=" << rho
                   << ": W=" << 100.0 * rep.welfare << "%\n";
            ++cell_index;
        }
    }
    csv::write_file((dir / "welfare.csv").string(), t.str());
    return 0;
}

int cmd_clear(const Ini& ini, const Setup& s, const fs::path& dir, std::ostringstream& report) {
    const Network net = config::read_network(ini);
    {
        const auto violations = validate_network(net);
        if (!violations.empty())
            throw SchemaError("[network]: " + to_string(violations.front()));
    }
    const std::size_t n = net.size();

    std::vector<std::vector<double>> shocks;
    const auto gross_lines = ini.all("shocks", "gross");
    if (!gross_lines.empty()) {
        for (const std::string& line : gross_lines) {
            auto v = config::parse_double_list(line, "[shocks].gross");
            if (v.size() != n)
                throw SchemaError("[shocks].gross: each row needs " + std::to_string(n) +
                                  " entries");
            shocks.push_back(std::move(v));
        }
    } else {
        const std::size_t nd = static_cast<std::size_t>(ini.get_int("shocks", "draws", 100));
        const double rho = ini.get_double("shocks", "rho", 0.0);
        const std::uint64_t seed =
            static_cast<std::uint64_t>(ini.get_int("shocks", "seed",
                                                   static_cast<long long>(s.seed)));
        ReturnModel model;
        model.log_mean.resize(n);
        model.log_vol.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            returns::CalibrationTarget target;
            target.mean_net_return = returns::expected_net_return(
                net.at(i).debt_rate, s.target_leverage, s.base_net_return);
            target.prob_default = s.prob_default;
            target.leverage_ratio = s.target_leverage;
            const auto cal = returns::calibrate(target);
            model.log_mean[i] = cal.log_mean;
            model.log_vol[i] = cal.log_vol;
        }
        Matrix c(n, n, rho);
        for (std::size_t i = 0; i < n; ++i) c(i, i) = 1.0;
        model.correlation = c;
        const auto draws = returns::sample_gross_returns(model, nd, seed);
        for (std::size_t k = 0; k < nd; ++k) {
            std::vector<double> row(n);
            for (std::size_t i = 0; i < n; ++i) row[i] = draws(k, i);
            shocks.push_back(std::move(row));
        }
    }

    csv::Table t({"draw", "bank", "gross_return", "asset_value", "equity", "debt_value", "regime",
                  "method", "residual", "regimes_tested"});
    std::size_t defaults = 0;
    for (std::size_t k = 0; k < shocks.size(); ++k) {
        const auto rnet = clearing::realize(net, shocks[k]);
        const auto cr = clearing::clear_heuristic(rnet);
        for (std::size_t i = 0; i < n; ++i) {
            if (cr.regime[i] == Regime::defaulted) ++defaults;
            t.add_row({std::to_string(k), std::to_string(i + 1), fmt(shocks[k][i]),
                       fmt(rnet.asset_value[i]), fmt(cr.equity[i]), fmt(cr.debt_value[i]),
                       cr.regime[i] == Regime::solvent ? "solvent" : "default", "heuristic",
                       fmt(cr.residual), std::to_string(cr.regimes_tested)});
        }
    }
    csv::write_file((dir / "clear.csv").string(), t.str());
    report << "cleared " << shocks.size() << " draws, " << defaults << " bank-defaults\n";
    return 0;
}

}  // namespace

int run(const RunOptions& opts) {
    std::string config_text;
    try {
        config_text = csv::read_file(opts.config_path);
    } catch (const std::exception& e) {
        std::cerr << "cli: " << e.what() << "\n";
        return 1;
    }

    try {
        const Ini ini = Ini::parse(config_text);
        ini.check_known(allowed_for(opts.command));

        fs::create_directories(opts.out_dir);
        const fs::path dir(opts.out_dir);
        std::ostringstream report;
        report << "banknet " << kVersion << " :: " << opts.command << "\n";

        int rc = 0;
        if (opts.command == "clear") {
            Setup s;   // clear uses only the returns defaults plus overrides
            s.threads = std::max(1, opts.threads);
            s.base_net_return = ini.get_double("returns", "base_net_return", 0.01);
            s.prob_default = ini.get_double("returns", "prob_default", 0.001);
            s.target_leverage = ini.get_double("returns", "target_leverage", 0.91);
            s.seed = static_cast<std::uint64_t>(ini.get_int("simulation", "seed", 42));
            if (opts.seed) s.seed = *opts.seed;
            write_manifest(dir, opts, config_text, &s);
            rc = cmd_clear(ini, s, dir, report);
        } else {
            const Setup s = load_setup(ini, opts);
            write_manifest(dir, opts, config_text, &s);
            if (opts.command == "calibrate") rc = cmd_calibrate(s, dir, report);
            else if (opts.command == "optimize-single") rc = cmd_optimize_single(s, dir, report);
            else if (opts.command == "form") rc = cmd_form(s, dir, report);
            else if (opts.command == "welfare") rc = cmd_welfare(s, dir, report);
            else {
                std::cerr << "cli: unknown command '" << opts.command << "'\n";
                return 2;
            }
        }
        csv::write_file((dir / "report.txt").string(), report.str());
        return rc;
    } catch (const SchemaError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error (" << opts.command << "): " << e.what() << "\n";
        return 1;
    }
}

}  // namespace banknet::cli
