// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "stsad/errors.hpp"
#include "stsad/mle.hpp"
#include "stsad/optimizer.hpp"
#include "stsad/rng.hpp"
#include "stsad/state_space.hpp"

using namespace stsad;

namespace {

const StructuralSpec kLocalLevel{Trend::local_level, Seasonal::none, ErrorModel::gaussian,
                                 Transform::identity};

std::vector<double> iid_normal(std::size_t n, double sd, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> y(n);
    for (auto& v : y) v = sd * rng.normal();
    return y;
}

std::vector<double> random_walk_plus_noise(std::size_t n, double q, double h,
                                           std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> y(n);
    double level = 0.0;
    for (auto& v : y) {
        level += std::sqrt(q) * rng.normal();
        v = level + std::sqrt(h) * rng.normal();
    }
    return y;
}

}  // namespace

TEST_CASE("iid data: only H+Q is identified, and its sum is recovered") {
    const auto y = iid_normal(2000, 2.0, 404);  // variance 4
    const ModelFamily family(kLocalLevel, 60);
    const FitResult fit = fit_mle(family, y);
    const auto natural = family.natural(fit.theta, fit.train_variance);
    const double sum = natural.H + natural.q_diag[0];
    CHECK(sum == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("random walk plus noise recovers both variances") {
    const auto y = random_walk_plus_noise(2000, 1.0, 0.25, 505);
    const ModelFamily family(kLocalLevel, 60);
    const FitResult fit = fit_mle(family, y);
    const auto natural = family.natural(fit.theta, fit.train_variance);
    CHECK(natural.q_diag[0] == doctest::Approx(1.0).epsilon(0.25));
    CHECK(natural.H == doctest::Approx(0.25).epsilon(0.25));
}

TEST_CASE("constant series pins H to the floor without crashing") {
    const std::vector<double> y(200, 5.0);
    const ModelFamily family(kLocalLevel, 60);
    const FitResult fit = fit_mle(family, y);
    const auto natural = family.natural(fit.theta, fit.train_variance);
    const double floor = family.variance_floor(fit.train_variance);
    CHECK(fit.train_variance == 0.0);
    CHECK(floor == doctest::Approx(1e-8));
    CHECK(natural.H >= floor);
    CHECK(natural.H <= 2.0 * floor);
}

TEST_CASE("fit never returns less likelihood than the best start") {
    const auto y = random_walk_plus_noise(400, 0.5, 0.5, 606);
    const ModelFamily family(kLocalLevel, 60);
    const double train_variance = masked_variance(y, {});
    const FitResult fit = fit_mle(family, y);
    for (const auto& start : family.starts(y, {})) {
        const double ll_start = filter_loglik(family.materialize(start, train_variance), y);
        CHECK(fit.loglik >= ll_start - 1e-9);
    }
}

TEST_CASE("finite-difference gradient at the optimum is near zero") {
    const auto y = random_walk_plus_noise(800, 1.0, 0.5, 707);
    const ModelFamily family(kLocalLevel, 60);
    const FitResult fit = fit_mle(family, y);
    const auto objective = [&](const Eigen::VectorXd& theta) {
        return -filter_loglik(family.materialize(theta, fit.train_variance), y);
    };
    const Eigen::VectorXd g = fd_gradient(objective, fit.theta, 1e-5);
    const double scale = 1.0 + std::abs(fit.loglik);
    CHECK(g.cwiseAbs().maxCoeff() <= 1e-3 * scale);
}

TEST_CASE("simulate-and-refit reaches the truth's likelihood") {
    // The generating family, refit on its own draw, must score at least the
    // true parameters' likelihood minus a small margin.
    const ModelFamily family(kLocalLevel, 60);
    const auto y = random_walk_plus_noise(1000, 0.7, 0.4, 808);
    const FitResult fit = fit_mle(family, y);

    const double train_variance = masked_variance(y, {});
    const double floor = family.variance_floor(train_variance);
    Eigen::VectorXd truth(2);
    truth << std::log(0.4 - floor), std::log(0.7 - floor);  // H, q_level
    const double ll_truth = filter_loglik(family.materialize(truth, train_variance), y);
    CHECK(fit.loglik >= ll_truth - 2.0);
}

TEST_CASE("masked points participate as unobserved") {
    auto y = random_walk_plus_noise(600, 0.5, 0.5, 909);
    std::vector<std::uint8_t> mask(y.size(), 0);
    for (std::size_t i = 100; i < 140; ++i) {
        mask[i] = 1;
        y[i] = 1e12;  // placeholder poison: must never be read
    }
    const ModelFamily family(kLocalLevel, 60);
    const FitResult fit = fit_mle(family, y, mask);
    const auto natural = family.natural(fit.theta, fit.train_variance);
    CHECK(std::isfinite(fit.loglik));
    CHECK(natural.q_diag[0] == doctest::Approx(0.5).epsilon(0.5));
}

TEST_CASE("too-short training raises a fit error") {
    const std::vector<double> y(5, 1.0);
    const ModelFamily family(kLocalLevel, 60);
    CHECK_THROWS_AS((void)fit_mle(family, y), FitError);
}

TEST_CASE("ar1 error fit recovers strong serial correlation") {
    // Level 10 with AR(1) noise, phi = 0.8.
    Rng rng(1010);
    std::vector<double> y(1500);
    double e = 0.0;
    for (auto& v : y) {
        e = 0.8 * e + 0.5 * rng.normal();
        v = 10.0 + e;
    }
    const ModelFamily family(StructuralSpec{Trend::local_level, Seasonal::none, ErrorModel::ar1,
                                            Transform::identity},
                             60);
    const FitResult fit = fit_mle(family, y);
    const auto natural = family.natural(fit.theta, fit.train_variance);
    REQUIRE(natural.ar_coef.size() == 1);
    CHECK(natural.ar_coef[0] == doctest::Approx(0.8).epsilon(0.2));
}

TEST_CASE("bfgs minimizes a quadratic exactly") {
    const auto f = [](const Eigen::VectorXd& x) {
        return 2.0 * (x(0) - 1.0) * (x(0) - 1.0) + 0.5 * (x(1) + 3.0) * (x(1) + 3.0);
    };
    const BfgsResult r = minimize_bfgs(f, Eigen::VectorXd::Zero(2), {});
    CHECK(r.converged);
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.x(1) == doctest::Approx(-3.0).epsilon(1e-4));
}

TEST_CASE("bfgs treats non-finite regions as walls") {
    const auto f = [](const Eigen::VectorXd& x) {
        if (x(0) > 2.0) return std::numeric_limits<double>::quiet_NaN();
        return (x(0) - 1.5) * (x(0) - 1.5);
    };
    const BfgsResult r = minimize_bfgs(f, Eigen::VectorXd::Zero(1), {});
    CHECK(r.x(0) == doctest::Approx(1.5).epsilon(1e-3));
}
