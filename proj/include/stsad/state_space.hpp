// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace stsad {

// Linear-Gaussian state-space model with time-invariant system matrices:
//
//   y_t     = Z a_t + d + eps_t,          eps_t ~ N(0, H)
//   a_t     = T a_{t-1} + c + R eta_t,    eta_t ~ N(0, Q)
//
// The observation is univariate. Diffuse initial coordinates are approximated
// by a large prior variance in P1 and flagged in `diffuse`; the filter drops
// the first diffuse_count() non-masked steps from the log-likelihood.
struct StateSpaceModel {
    Eigen::RowVectorXd Z;    // 1 x m
    Eigen::MatrixXd T;       // m x m transition
    Eigen::MatrixXd R;       // m x r selection
    Eigen::MatrixXd Q;       // r x r state-noise covariance
    double H{0.0};           // observation-noise variance
    double d{0.0};           // observation intercept
    Eigen::VectorXd c;       // m, state intercept
    Eigen::VectorXd a1;      // m, initial state mean
    Eigen::MatrixXd P1;      // m x m initial state covariance
    std::vector<std::uint8_t> diffuse;  // per-coordinate diffuse flags

    int state_dim() const { return static_cast<int>(T.rows()); }
    int noise_dim() const { return static_cast<int>(Q.rows()); }
    int diffuse_count() const;

    void validate() const;  // throws DataError on dimension/PSD violations
};

struct StatePosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

struct FilterOutput {
    std::vector<double> pred_mean;         // one-step-ahead observation mean
    std::vector<double> pred_var;          // one-step-ahead observation variance
    Eigen::MatrixXd filtered_state;        // m x n posterior state means
    std::vector<Eigen::MatrixXd> filtered_cov;  // per-step posterior covariance
    double loglik{0.0};                    // diffuse-corrected
    int loglik_skipped{0};                 // steps excluded by diffuse handling
};

// Full Kalman recursion with per-step history. Masked points skip the
// measurement update (prediction-only step) and contribute no likelihood.
FilterOutput kalman_filter(const StateSpaceModel& model, std::span<const double> y,
                           std::span<const std::uint8_t> mask = {});

// Log-likelihood only; no per-step storage. Identical recursion.
double filter_loglik(const StateSpaceModel& model, std::span<const double> y,
                     std::span<const std::uint8_t> mask = {});

// Posterior at the final step plus the likelihood, without history.
std::pair<StatePosterior, double> filter_posterior(const StateSpaceModel& model,
                                                   std::span<const double> y,
                                                   std::span<const std::uint8_t> mask = {});

// One-step-ahead predictive (mean, variance) of the observation given the
// posterior at the previous step: mean = Z(Ta+c)+d, var = Z(TPT'+RQR')Z'+H.
std::pair<double, double> forecast_one(const StateSpaceModel& model,
                                       const StatePosterior& posterior);

// Advances the posterior one step. When `observed` is set the measurement
// update runs with that (already transformed) value; otherwise the step is
// prediction-only.
StatePosterior advance_posterior(const StateSpaceModel& model, const StatePosterior& posterior,
                                 const double* observed);

struct Simulation {
    std::vector<double> y;
    Eigen::MatrixXd states;  // m x n
};

// Draws a trajectory. The initial state is sampled from N(a1, P1); callers
// wanting a fixed start pass P1 = 0.
Simulation simulate(const StateSpaceModel& model, std::size_t n, std::uint64_t seed);

}  // namespace stsad
