// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include <Eigen/Dense>

namespace stsad {

struct BfgsOptions {
    double rel_tol{1e-6};    // relative objective-improvement tolerance
    int max_iter{500};
    double fd_step{1e-5};    // forward-difference step scale
};

struct BfgsResult {
    Eigen::VectorXd x;
    double f{0.0};
    int iterations{0};
    bool converged{false};
};

// Quasi-Newton minimizer with forward-difference gradients and Armijo
// backtracking. Non-finite objective values are treated as +inf rejections,
// so the line search backs away from them. Deterministic.
BfgsResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& objective,
                         Eigen::VectorXd x0, const BfgsOptions& options = {});

// Central-difference gradient, used by tests to check stationarity.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& objective,
                            const Eigen::VectorXd& x, double step = 1e-5);

}  // namespace stsad
