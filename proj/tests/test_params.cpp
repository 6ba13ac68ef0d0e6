// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stsad/errors.hpp"
#include "stsad/param_map.hpp"
#include "stsad/rng.hpp"

using namespace stsad;

TEST_CASE("variance map round-trips above the floor") {
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        const double floor = std::pow(10.0, -10.0 + 8.0 * rng.uniform());
        const double theta = -20.0 + 40.0 * rng.uniform();
        const double v = theta_to_variance(theta, floor);
        CHECK(v > floor);
        CHECK(variance_to_theta(v, floor) == doctest::Approx(theta).epsilon(1e-10));
    }
}

TEST_CASE("variance at or below the floor has no preimage") {
    CHECK_THROWS_AS((void)variance_to_theta(1e-8, 1e-8), DataError);
    CHECK_THROWS_AS((void)variance_to_theta(0.5e-8, 1e-8), DataError);
}

TEST_CASE("pacf transform round-trips to 1e-10") {
    Rng rng(11);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t p = 1 + rng.next_u64() % 2;
        std::vector<double> z(p);
        for (auto& v : z) v = -3.0 + 6.0 * rng.uniform();
        const auto phi = pacf_to_ar(z);
        const auto z_back = ar_to_pacf(phi);
        REQUIRE(z_back.size() == p);
        for (std::size_t i = 0; i < p; ++i) {
            CHECK(z_back[i] == doctest::Approx(z[i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("pacf transform lands inside the stationarity region") {
    Rng rng(13);
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<double> z{-6.0 + 12.0 * rng.uniform(), -6.0 + 12.0 * rng.uniform()};
        const auto phi = pacf_to_ar(z);
        // AR(2) stationarity triangle.
        CHECK(std::abs(phi[1]) < 1.0);
        CHECK(phi[0] + phi[1] < 1.0);
        CHECK(phi[1] - phi[0] < 1.0);
    }
}

TEST_CASE("nonstationary coefficients are rejected by the inverse") {
    CHECK_THROWS_AS((void)ar_to_pacf(std::vector<double>{1.2}), DataError);
    CHECK_THROWS_AS((void)ar_to_pacf(std::vector<double>{0.5, 0.7}), DataError);
}

TEST_CASE("AR(1) pacf is the coefficient itself") {
    const auto phi = pacf_to_ar(std::vector<double>{std::atanh(0.6)});
    CHECK(phi[0] == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("stationary autocovariance matches a long Lyapunov iteration") {
    Rng rng(17);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> z{-2.0 + 4.0 * rng.uniform(), -2.0 + 4.0 * rng.uniform()};
        const auto phi = pacf_to_ar(z);
        const double q = 0.1 + rng.uniform();
        const auto gamma = ar_stationary_autocov(phi, q);

        // Iterate P <- T P T' + R q R' to the fixed point.
        Eigen::Matrix2d T;
        T << phi[0], phi[1], 1.0, 0.0;
        Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
        Eigen::Matrix2d RqR = Eigen::Matrix2d::Zero();
        RqR(0, 0) = q;
        for (int i = 0; i < 200000; ++i) {
            const Eigen::Matrix2d next = T * P * T.transpose() + RqR;
            if ((next - P).cwiseAbs().maxCoeff() < 1e-15) {
                P = next;
                break;
            }
            P = next;
        }
        CHECK(P(0, 0) == doctest::Approx(gamma[0]).epsilon(1e-8));
        CHECK(P(0, 1) == doctest::Approx(gamma[1]).epsilon(1e-8));
    }
}
