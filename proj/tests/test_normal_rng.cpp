#include <doctest.h>

#include <cmath>

#include "banknet/normal.hpp"
#include "banknet/rng.hpp"

using namespace banknet;

TEST_CASE("normal cdf / quantile round-trip to 1e-12") {
    // the calibration quadratic amplifies quantile error near p = 1e-3,
    // so the round-trip accuracy matters
    const double ps[] = {1e-9, 1e-6, 1e-4, 1e-3, 0.01, 0.05, 0.25, 0.5,
                         0.75, 0.9, 0.99, 0.999, 1.0 - 1e-7};
    for (double p : ps) {
        const double x = norm_ppf(p);
        CHECK(std::fabs(norm_cdf(x) - p) <= 1e-12 * std::max(1.0, std::fabs(p)));
    }
    CHECK(norm_ppf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(norm_ppf(0.001) == doctest::Approx(-3.0902323061678132).epsilon(1e-12));
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5));
}

TEST_CASE("philox blocks are pure functions of (seed, index, stream)") {
    const Philox a(12345), b(12345), c(54321);
    CHECK(a.block(7, 3) == b.block(7, 3));
    CHECK(a.block(7, 3) != c.block(7, 3));
    CHECK(a.block(7, 3) != a.block(8, 3));
    CHECK(a.block(7, 3) != a.block(7, 4));
    const auto u = a.uniform2(11, 0);
    CHECK(u[0] > 0.0);
    CHECK(u[0] < 1.0);
    CHECK(u[1] > 0.0);
    CHECK(u[1] < 1.0);
}

TEST_CASE("philox normals have unit scale") {
    const Philox g(99);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
        const auto z = g.normal2(static_cast<std::uint64_t>(k), 0);
        sum += z[0] + z[1];
        sum_sq += z[0] * z[0] + z[1] * z[1];
    }
    const double mean = sum / (2.0 * n);
    const double var = sum_sq / (2.0 * n) - mean * mean;
    CHECK(std::fabs(mean) < 5e-3);
    CHECK(std::fabs(var - 1.0) < 1e-2);
}
