// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include <Eigen/Dense>

#include "stsad/optimizer.hpp"
#include "stsad/structural.hpp"

namespace stsad {

struct FitOptions {
    double rel_tol{1e-6};
    int max_iter{500};
};

struct FitResult {
    Eigen::VectorXd theta;   // unconstrained optimum
    double loglik{0.0};
    double train_variance{0.0};
    int iterations{0};
    int best_start{0};
};

// Maximum-likelihood fit of a model family on (already transformed) training
// data by quasi-Newton search from three deterministic starts. Masked points
// are treated as unobserved. Throws FitError when training is too short
// (fewer observed points than 3x the free-parameter count) or when every
// start yields a non-finite objective.
FitResult fit_mle(const ModelFamily& family, std::span<const double> y,
                  std::span<const std::uint8_t> mask = {}, const FitOptions& options = {});

}  // namespace stsad
