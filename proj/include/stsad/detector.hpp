// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stsad/selection.hpp"
#include "stsad/state_space.hpp"
#include "stsad/time_series.hpp"

namespace stsad {

struct ZeroStats {
    std::size_t zero_count{0};
    std::size_t total_count{0};

    double proportion() const {
        return total_count == 0 ? 0.0
                                : static_cast<double>(zero_count) / static_cast<double>(total_count);
    }
};

// Proportion of zero-valued points (|v| <= 1e-12) in the training data.
ZeroStats train_zero_stats(std::span<const double> values,
                           std::span<const std::uint8_t> mask = {});

enum class DecisionRule { continuous_ksigma, discrete_zero, discrete_zero_normal };

std::string rule_name(DecisionRule r);

// Per-component contribution to the expected value (model scale). Their sum
// equals `expected`.
struct ComponentBreakdown {
    double trend{0.0};
    double seasonal{0.0};
    double error{0.0};
};

struct AnomalyDecision {
    std::int64_t timestamp{0};
    double value{0.0};
    bool is_anomaly{false};
    DecisionRule rule{DecisionRule::continuous_ksigma};
    double expected{0.0};  // one-step-ahead mean, model (transformed) scale
    double sigma{0.0};     // one-step-ahead standard deviation, model scale
    std::optional<double> score;  // |obs - expected| / sigma; absent for the zero rule
    ComponentBreakdown components;
    Transform transform{Transform::identity};
};

// JSON-lines form, one decision per line.
std::string decision_to_json(const AnomalyDecision& d);
AnomalyDecision decision_from_json(const std::string& line);

// Detection state threaded through decisions. Value semantics; the fitted
// model is shared immutably.
struct DetectorState {
    std::shared_ptr<const FittedModel> model;
    StatePosterior posterior;
    ZeroStats zero_stats;
    double k{4.0};  // Table-2 best-F1 default
};

// Builds a detector resuming from the model's training posterior.
DetectorState make_detector(std::shared_ptr<const FittedModel> model, double k = 4.0);

// One streaming decision. Zero-valued observations route through the
// discrete rule (proportion > 1% in training means zero is normal) and skip
// the Kalman update; anything else is scored against the one-step-ahead
// Gaussian, anomalous iff score > k strictly, and the state is updated with
// the observation regardless of the verdict.
std::pair<AnomalyDecision, DetectorState> decide_point(const DetectorState& state,
                                                       std::int64_t timestamp, double observed);

// Sequential decisions over a grid-aligned series; masked points yield no
// decision and a prediction-only step.
std::vector<AnomalyDecision> detect_series(DetectorState& state, const TimeSeries& test,
                                           std::span<const std::uint8_t> mask = {});

}  // namespace stsad
