// SPDX-License-Identifier: Apache-2.0
#include "stsad/mle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stsad/errors.hpp"
#include "stsad/state_space.hpp"

namespace stsad {

FitResult fit_mle(const ModelFamily& family, std::span<const double> y,
                  std::span<const std::uint8_t> mask, const FitOptions& options) {
    std::size_t observed = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (mask.empty() || mask[i] == 0) ++observed;
    }
    const auto min_points = static_cast<std::size_t>(3 * family.n_params());
    if (observed < min_points) {
        throw FitError("training too short: " + std::to_string(observed) +
                       " observed points for " + std::to_string(family.n_params()) +
                       " free parameters");
    }
    // The diffuse burn-in must leave likelihood terms to fit on.
    const double train_variance = masked_variance(y, mask);
    {
        const auto diffuse = static_cast<std::size_t>(
            family.materialize(Eigen::VectorXd::Zero(family.n_params()), train_variance)
                .diffuse_count());
        if (observed <= diffuse + static_cast<std::size_t>(family.n_params())) {
            throw FitError("training too short for diffuse initialization: " +
                           std::to_string(observed) + " observed points, " +
                           std::to_string(diffuse) + " diffuse states");
        }
    }

    const auto objective = [&](const Eigen::VectorXd& theta) -> double {
        try {
            const StateSpaceModel model = family.materialize(theta, train_variance);
            return -filter_loglik(model, y, mask);
        } catch (const FilterError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    BfgsOptions bfgs;
    bfgs.rel_tol = options.rel_tol;
    bfgs.max_iter = options.max_iter;

    FitResult best;
    bool have_best = false;
    int index = 0;
    const auto starts = family.starts(y, mask);
    for (const auto& start : starts) {
        const BfgsResult r = minimize_bfgs(objective, start, bfgs);
        // r.f is the negative log-likelihood; keep the best finite optimum.
        if (std::isfinite(r.f) && (!have_best || r.f < -best.loglik)) {
            best.theta = r.x;
            best.loglik = -r.f;
            best.iterations = r.iterations;
            best.best_start = index;
            have_best = true;
        }
        ++index;
    }
    if (!have_best) {
        throw FitError("optimizer produced a non-finite objective at every start");
    }
    best.train_variance = train_variance;
    return best;
}

}  // namespace stsad
