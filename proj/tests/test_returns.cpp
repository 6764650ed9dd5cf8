#include <doctest.h>

#include <cmath>
#include <random>

#include "banknet/normal.hpp"
#include "banknet/returns.hpp"
#include "oracles.hpp"

using namespace banknet;
using returns::CalibrationTarget;

TEST_CASE("calibration reproduces the default probability and mean") {
    CalibrationTarget t;
    t.mean_net_return = 0.01;
    t.prob_default = 0.001;
    t.leverage_ratio = 0.95;
    const auto c = returns::calibrate(t);
    // round-trip oracle: evaluate PD and mean back from (mu, sigma)
    CHECK(std::fabs(returns::implied_default_probability(c.log_mean, c.log_vol, 0.95) - 0.001) <
          1e-12);
    CHECK(std::fabs(returns::implied_mean_net_return(c.log_mean, c.log_vol) - 0.01) < 1e-12);
    CHECK(c.log_vol > 0.0);
}

TEST_CASE("p = 1/2 kills the linear quantile term") {
    CalibrationTarget t;
    t.mean_net_return = 0.02;
    t.prob_default = 0.5;
    t.leverage_ratio = 0.9;
    const auto c = returns::calibrate(t);
    CHECK(c.log_vol ==
          doctest::Approx(std::sqrt(-2.0 * std::log(0.9 / 1.02))).epsilon(1e-14));
}

TEST_CASE("zero-distance-to-default limit sends sigma to zero") {
    // leverage approaching 1+m from below with p = 1/2
    CalibrationTarget t;
    t.mean_net_return = -0.02;
    t.prob_default = 0.5;
    t.leverage_ratio = 0.98 - 1e-9;
    const auto c = returns::calibrate(t);
    CHECK(c.log_vol < 1e-4);
    CHECK(c.log_mean == doctest::Approx(std::log(0.98)).epsilon(1e-6));
}

TEST_CASE("calibration round-trip across a randomized grid") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> um(-0.05, 0.08), up(1e-4, 0.5), ul(0.3, 0.99);
    for (int i = 0; i < 500; ++i) {
        CalibrationTarget t;
        t.mean_net_return = um(rng);
        t.prob_default = up(rng);
        t.leverage_ratio = ul(rng);
        // the closed form needs leverage below 1+m (positive discriminant)
        if (t.leverage_ratio >= (1.0 + t.mean_net_return) * 0.999) { --i; continue; }
        const auto c = returns::calibrate(t);
        CHECK(std::fabs(returns::implied_default_probability(c.log_mean, c.log_vol,
                                                             t.leverage_ratio) -
                        t.prob_default) < 1e-12);
        CHECK(std::fabs(returns::implied_mean_net_return(c.log_mean, c.log_vol) -
                        t.mean_net_return) < 1e-12);
    }
}

TEST_CASE("implied volatility is monotone: increasing in p, decreasing in leverage") {
    CalibrationTarget t;
    t.mean_net_return = 0.01;
    t.leverage_ratio = 0.91;
    double prev = 0.0;
    for (double p : {0.0005, 0.001, 0.01, 0.05, 0.1, 0.25, 0.5}) {
        t.prob_default = p;
        const double s = returns::calibrate(t).log_vol;
        CHECK(s > prev);
        prev = s;
    }
    t.prob_default = 0.001;
    double prev_lev = 1e9;
    for (double lev : {0.5, 0.7, 0.9, 0.95, 0.99}) {
        t.leverage_ratio = lev;
        const double s = returns::calibrate(t).log_vol;
        CHECK(s < prev_lev);
        prev_lev = s;
    }
}

TEST_CASE("infeasible targets raise a calibration error naming the inputs") {
    CalibrationTarget t;
    t.prob_default = 0.0;
    CHECK_THROWS_AS((void)returns::calibrate(t), returns::CalibrationError);
    t.prob_default = 0.001;
    t.leverage_ratio = 1.5;
    CHECK_THROWS_AS((void)returns::calibrate(t), returns::CalibrationError);
}

namespace {

ReturnModel two_bank_model(double mu, double sigma, double rho) {
    ReturnModel m;
    m.log_mean = {mu, mu};
    m.log_vol = {sigma, sigma};
    m.correlation = Matrix(2, 2);
    m.correlation(0, 0) = m.correlation(1, 1) = 1.0;
    m.correlation(0, 1) = m.correlation(1, 0) = rho;
    return m;
}

}  // namespace

TEST_CASE("zero volatility draws collapse to exp(mu)") {
    const auto m = two_bank_model(0.01, 0.0, 0.0);
    const auto d = returns::sample_gross_returns(m, 100, 9);
    for (std::size_t k = 0; k < d.draws(); ++k) {
        CHECK(d(k, 0) == doctest::Approx(std::exp(0.01)).epsilon(1e-15));
        CHECK(d(k, 1) == doctest::Approx(std::exp(0.01)).epsilon(1e-15));
    }
}

TEST_CASE("perfect correlation makes the log-return columns identical") {
    const auto m = two_bank_model(0.0, 0.2, 1.0);
    const auto d = returns::sample_gross_returns(m, 5000, 3);
    for (std::size_t k = 0; k < d.draws(); ++k)
        CHECK(std::log(d(k, 0)) == doctest::Approx(std::log(d(k, 1))).epsilon(1e-12));
}

TEST_CASE("sample log-return correlation matches rho = -0.9 within 0.01") {
    const auto m = two_bank_model(0.01, 0.05, -0.9);
    const auto d = returns::sample_gross_returns(m, 100000, 17);
    std::vector<double> x(d.draws()), y(d.draws());
    for (std::size_t k = 0; k < d.draws(); ++k) {
        x[k] = std::log(d(k, 0));
        y[k] = std::log(d(k, 1));
    }
    CHECK(std::fabs(oracles::pearson(x, y) - (-0.9)) < 0.01);
}

TEST_CASE("same seed gives bit-identical draw matrices") {
    const auto m = two_bank_model(0.01, 0.034, -0.6);
    const auto a = returns::sample_gross_returns(m, 4096, 123);
    const auto b = returns::sample_gross_returns(m, 4096, 123);
    const auto c = returns::sample_gross_returns(m, 4096, 124);
    CHECK(a == b);
    CHECK(a.data() != c.data());
}

TEST_CASE("marginals pass a 1% Kolmogorov-Smirnov test of lognormality") {
    const double mu = 0.0094, sigma = 0.0336;
    const auto m = two_bank_model(mu, sigma, -0.9);
    const auto d = returns::sample_gross_returns(m, 100000, 31);
    std::vector<double> col(d.draws());
    for (std::size_t k = 0; k < d.draws(); ++k) col[k] = d(k, 1);
    const double stat = oracles::ks_statistic(
        col, [&](double g) { return norm_cdf((std::log(g) - mu) / sigma); });
    // asymptotic 1% critical value
    CHECK(stat < 1.628 / std::sqrt(static_cast<double>(d.draws())));
}

TEST_CASE("non-PSD correlation input is rejected") {
    ReturnModel m;
    m.log_mean = {0, 0, 0};
    m.log_vol = {0.1, 0.1, 0.1};
    m.correlation = Matrix(3, 3);
    for (int i = 0; i < 3; ++i) m.correlation(i, i) = 1.0;
    // rho12 = rho13 = 0.9, rho23 = -0.9 is infeasible
    m.correlation(0, 1) = m.correlation(1, 0) = 0.9;
    m.correlation(0, 2) = m.correlation(2, 0) = 0.9;
    m.correlation(1, 2) = m.correlation(2, 1) = -0.9;
    CHECK_THROWS((void)returns::sample_gross_returns(m, 10, 1));
}

TEST_CASE("expected net return adds the funding spread through leverage") {
    CHECK(returns::expected_net_return(0.0, 0.95) == doctest::Approx(0.01));
    CHECK(returns::expected_net_return(0.01, 0.95) == doctest::Approx(0.0195));
    CHECK(returns::expected_net_return(0.01, 0.0) == doctest::Approx(0.01));
}
