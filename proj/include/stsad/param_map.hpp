// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace stsad {

// Unconstrained-to-constrained maps used by the ParamVector bijection.
//
// Variances: sigma^2 = floor + exp(theta). Strictly above the floor, so the
// inverse theta = ln(sigma^2 - floor) is exact; round-trips to machine
// precision.
double theta_to_variance(double theta, double floor);
double variance_to_theta(double variance, double floor);

// AR stationarity via the partial-autocorrelation transform: unconstrained
// z_i map through tanh to partial autocorrelations in (-1, 1), then the
// Durbin-Levinson recursion produces AR coefficients inside the stationarity
// region. The inverse exists for any stationary coefficient vector.
std::vector<double> pacf_to_ar(std::span<const double> z);
std::vector<double> ar_to_pacf(std::span<const double> phi);

// Stationary covariance entries of an AR(p) state block, p in {1, 2}:
// gamma[0] = Var(e_t), gamma[1] = Cov(e_t, e_{t-1}). Yule-Walker closed form.
std::vector<double> ar_stationary_autocov(std::span<const double> phi, double innovation_var);

}  // namespace stsad
