#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "banknet/domain.hpp"

namespace banknet::returns {

/// Inputs of the implied-volatility calibration: empirical mean net return,
/// one-period default probability and the stylized autarkic bank's leverage.
struct CalibrationTarget {
    double mean_net_return = 0.01;   // m
    double prob_default = 0.001;     // p in (0, 0.5]
    double leverage_ratio = 0.91;    // L / A in (0,1)
};

struct Calibrated {
    double log_mean = 0.0;   // mu
    double log_vol = 0.0;    // sigma
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Solves sigma^2/2 - sigma * Phi^-1(p) + log(lev/(1+m)) = 0 for the
/// positive root and backs out mu = log(1+m) - sigma^2/2. The negative
/// root is discarded; a non-positive discriminant (impossible targets)
/// throws CalibrationError naming the inputs.
Calibrated calibrate(const CalibrationTarget& target);

/// Round-trip helpers: the default probability and mean net return implied
/// by (mu, sigma) at a given leverage. calibrate() inverts these.
double implied_default_probability(double log_mean, double log_vol, double leverage_ratio);
double implied_mean_net_return(double log_mean, double log_vol);

/// Mean net return of the external assets: base net income plus the
/// funding spread passed through leverage.
double expected_net_return(double debt_rate, double leverage, double base_net_income = 0.01);

/// Row-major draws x institutions matrix of gross returns.
class DrawMatrix {
public:
    DrawMatrix() = default;
    DrawMatrix(std::size_t n_draws, std::size_t n) : n_(n), data_(n_draws * n) {}

    std::size_t draws() const { return n_ == 0 ? 0 : data_.size() / n_; }
    std::size_t banks() const { return n_; }
    double operator()(std::size_t k, std::size_t i) const { return data_[k * n_ + i]; }
    double& operator()(std::size_t k, std::size_t i) { return data_[k * n_ + i]; }
    const double* row(std::size_t k) const { return data_.data() + k * n_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const DrawMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Correlated lognormal gross returns: row k, column i is
/// exp(mu_i + sigma_i * y_ki) with y ~ N(0, rho). Counter-based generation:
/// identical (model, n_draws, seed) gives bit-identical output regardless
/// of how the draw space is partitioned across workers.
DrawMatrix sample_gross_returns(const ReturnModel& model, std::size_t n_draws, std::uint64_t seed);

}  // namespace banknet::returns
