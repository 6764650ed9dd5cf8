#include "banknet/returns.hpp"

#include <cmath>

#include "banknet/normal.hpp"
#include "banknet/rng.hpp"

namespace banknet::returns {

Calibrated calibrate(const CalibrationTarget& t) {
    if (!(t.prob_default > 0.0 && t.prob_default <= 0.5))
        throw CalibrationError("calibrate: prob_default " + std::to_string(t.prob_default) +
                               " outside (0, 0.5]");
    if (!(t.leverage_ratio > 0.0 && t.leverage_ratio < 1.0))
        throw CalibrationError("calibrate: leverage_ratio " + std::to_string(t.leverage_ratio) +
                               " outside (0, 1)");
    if (!(1.0 + t.mean_net_return > 0.0))
        throw CalibrationError("calibrate: mean_net_return " + std::to_string(t.mean_net_return) +
                               " below -1");

    const double q = norm_ppf(t.prob_default);
    const double log_dd = std::log(t.leverage_ratio / (1.0 + t.mean_net_return));
    const double disc = q * q - 2.0 * log_dd;
    if (!(disc > 0.0))
        throw CalibrationError("calibrate: non-positive discriminant for (m=" +
                               std::to_string(t.mean_net_return) + ", p=" +
                               std::to_string(t.prob_default) + ", lev=" +
                               std::to_string(t.leverage_ratio) + ")");
    Calibrated c;
    c.log_vol = q + std::sqrt(disc);   // the other root is strictly negative
    c.log_mean = std::log1p(t.mean_net_return) - 0.5 * c.log_vol * c.log_vol;
    return c;
}

double implied_default_probability(double log_mean, double log_vol, double leverage_ratio) {
    return norm_cdf((std::log(leverage_ratio) - log_mean) / log_vol);
}

double implied_mean_net_return(double log_mean, double log_vol) {
    return std::exp(log_mean + 0.5 * log_vol * log_vol) - 1.0;
}

double expected_net_return(double debt_rate, double leverage, double base_net_income) {
    return base_net_income + debt_rate * leverage;
}

DrawMatrix sample_gross_returns(const ReturnModel& model, std::size_t n_draws, std::uint64_t seed) {
    const std::size_t n = model.size();
    if (n == 0 || n_draws == 0) return DrawMatrix(n_draws, n);
    if (model.log_vol.size() != n || model.correlation.rows() != n || model.correlation.cols() != n)
        throw std::invalid_argument("sample_gross_returns: model shape mismatch");

    const Matrix chol = cholesky_psd(model.correlation);
    const Philox gen(seed);
    DrawMatrix out(n_draws, n);
    std::vector<double> z(n);
    for (std::size_t k = 0; k < n_draws; ++k) {
        for (std::size_t i = 0; i < n; i += 2) {
            const auto pair = gen.normal2(k, i / 2);
            z[i] = pair[0];
            if (i + 1 < n) z[i + 1] = pair[1];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double y = 0.0;
            for (std::size_t j = 0; j <= i; ++j) y += chol(i, j) * z[j];
            out(k, i) = std::exp(model.log_mean[i] + model.log_vol[i] * y);
        }
    }
    return out;
}

}  // namespace banknet::returns
