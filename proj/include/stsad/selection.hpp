// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stsad/mle.hpp"
#include "stsad/state_space.hpp"
#include "stsad/structural.hpp"
#include "stsad/time_series.hpp"

namespace stsad {

// The persisted unit: a structural spec plus estimated parameters and
// training metadata, sufficient to resume detection.
struct FittedModel {
    std::string kpi_id;
    StructuralSpec spec;
    std::int64_t granularity{0};
    Eigen::VectorXd theta;        // unconstrained parameter vector
    double train_variance{0.0};   // scale behind floors and the diffuse prior
    StateSpaceModel model;        // materialized from (spec, theta, train_variance)
    ComponentLayout layout;
    std::int64_t train_start{0};
    std::int64_t train_end{0};
    std::size_t zero_count{0};
    std::size_t total_count{0};
    double loglik{0.0};
    StatePosterior posterior;     // filtered state at train_end
};

// JSON persistence; numeric fields round-trip exactly.
std::string fitted_model_to_json(const FittedModel& m);
FittedModel fitted_model_from_json(const std::string& text);
void save_fitted_model(const FittedModel& m, const std::string& path);
FittedModel load_fitted_model(const std::string& path);

struct CandidateResult {
    StructuralSpec spec;
    std::string status;  // "ok", "inapplicable: ...", or "failed: ..."
    double mse{0.0};     // validation MSE on the original scale (ok only)
    double loglik{0.0};
    int n_params{0};

    bool ok() const { return status == "ok"; }
};

struct SelectionReport {
    std::string kpi_id;
    std::int64_t granularity{0};
    std::int64_t window_start{0};
    std::int64_t window_end{0};
    std::size_t n_window{0};  // grid points in the training window
    std::size_t n_train{0};
    std::size_t n_validation{0};
    std::vector<CandidateResult> candidates;
    int winner_index{-1};
    double winner_refit_loglik{0.0};
};

std::string selection_report_to_json(const SelectionReport& r);

struct SelectionOptions {
    std::int64_t max_train_window_s{14 * 86400};  // trailing two weeks
    double split_ratio{0.8};
    int jobs{1};
    FitOptions fit;
    // Empty = full suite; otherwise only these spec strings are evaluated.
    std::vector<std::string> suite_filter;
};

// Evaluates the candidate suite on the series history and promotes the
// lowest-validation-MSE model, refit on the full window. Throws
// SelectionError when every candidate fails, DataError when the series is
// too short (< 50 grid points after windowing).
std::pair<FittedModel, SelectionReport> select_model(const TimeSeries& series,
                                                     const SelectionOptions& options = {},
                                                     const std::string& kpi_id = "");

// Index of the winning candidate: minimal MSE among "ok" entries, ties by
// fewer free parameters, then enumeration order. -1 when none succeeded.
int pick_winner(std::span<const CandidateResult> candidates);

// Mean squared difference; throws DataError on empty or mismatched input.
double validation_mse(std::span<const double> predictions, std::span<const double> actuals);

}  // namespace stsad
