// SPDX-License-Identifier: Apache-2.0
#include "stsad/detector.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "stsad/errors.hpp"

namespace stsad {

namespace {

ComponentBreakdown breakdown_of(const FittedModel& model, const Eigen::VectorXd& a_pred) {
    const auto& lay = model.layout;
    const auto& Z = model.model.Z;
    ComponentBreakdown b;
    for (int i = 0; i < lay.trend_size; ++i) {
        b.trend += Z(lay.trend_begin + i) * a_pred(lay.trend_begin + i);
    }
    for (int i = 0; i < lay.seasonal_size; ++i) {
        b.seasonal += Z(lay.seasonal_begin + i) * a_pred(lay.seasonal_begin + i);
    }
    for (int i = 0; i < lay.error_size; ++i) {
        b.error += Z(lay.error_begin + i) * a_pred(lay.error_begin + i);
    }
    return b;
}

}  // namespace

ZeroStats train_zero_stats(std::span<const double> values, std::span<const std::uint8_t> mask) {
    ZeroStats s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!mask.empty() && mask[i]) continue;
        ++s.total_count;
        if (is_zero_value(values[i])) ++s.zero_count;
    }
    return s;
}

std::string rule_name(DecisionRule r) {
    switch (r) {
        case DecisionRule::continuous_ksigma: return "continuous_ksigma";
        case DecisionRule::discrete_zero: return "discrete_zero";
        case DecisionRule::discrete_zero_normal: return "discrete_zero_normal";
    }
    return "?";
}

DetectorState make_detector(std::shared_ptr<const FittedModel> model, double k) {
    if (!model) {
        throw DataError("detector needs a fitted model");
    }
    if (!(k > 0.0)) {
        throw DataError("sigma multiplier k must be positive");
    }
    DetectorState state;
    state.posterior = model->posterior;
    state.zero_stats = ZeroStats{model->zero_count, model->total_count};
    if (state.zero_stats.total_count == 0) {
        throw DataError("fitted model has an empty training window");
    }
    state.k = k;
    state.model = std::move(model);
    return state;
}

std::pair<AnomalyDecision, DetectorState> decide_point(const DetectorState& state,
                                                       std::int64_t timestamp, double observed) {
    if (!std::isfinite(observed)) {
        throw DataError("non-finite observation at t=" + std::to_string(timestamp));
    }
    const FittedModel& fitted = *state.model;
    const StateSpaceModel& ssm = fitted.model;

    AnomalyDecision d;
    d.timestamp = timestamp;
    d.value = observed;
    d.transform = fitted.spec.transform;

    // Predictive distribution for reporting under either rule.
    const auto [mean, var] = forecast_one(ssm, state.posterior);
    d.expected = mean;
    d.sigma = std::sqrt(var);
    const Eigen::VectorXd a_pred = ssm.T * state.posterior.mean + ssm.c;
    d.components = breakdown_of(fitted, a_pred);

    DetectorState next = state;
    if (is_zero_value(observed)) {
        // Discrete regime; the continuous model treats the point as unobserved.
        const bool zeros_normal = state.zero_stats.proportion() > 0.01;
        d.rule = zeros_normal ? DecisionRule::discrete_zero_normal : DecisionRule::discrete_zero;
        d.is_anomaly = !zeros_normal;
        next.posterior = advance_posterior(ssm, state.posterior, nullptr);
    } else {
        const double transformed = apply_transform(observed, fitted.spec.transform);
        d.rule = DecisionRule::continuous_ksigma;
        d.score = std::abs(transformed - mean) / d.sigma;
        d.is_anomaly = *d.score > state.k;  // strictly more than k sigma
        next.posterior = advance_posterior(ssm, state.posterior, &transformed);
    }
    return {std::move(d), std::move(next)};
}

std::vector<AnomalyDecision> detect_series(DetectorState& state, const TimeSeries& test,
                                           std::span<const std::uint8_t> mask) {
    if (!mask.empty() && mask.size() != test.size()) {
        throw DataError("mask length mismatch");
    }
    std::vector<AnomalyDecision> out;
    out.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (!mask.empty() && mask[i]) {
            state.posterior = advance_posterior(state.model->model, state.posterior, nullptr);
            continue;
        }
        auto [decision, next] = decide_point(state, test.timestamps[i], test.values[i]);
        state = std::move(next);
        out.push_back(std::move(decision));
    }
    return out;
}

std::string decision_to_json(const AnomalyDecision& d) {
    nlohmann::ordered_json j;
    j["t"] = d.timestamp;
    j["value"] = d.value;
    j["anomaly"] = d.is_anomaly;
    j["rule"] = rule_name(d.rule);
    j["expected"] = d.expected;
    j["sigma"] = d.sigma;
    if (d.score) {
        j["score"] = *d.score;
    } else {
        j["score"] = nullptr;
    }
    j["components"] = {{"trend", d.components.trend},
                       {"seasonal", d.components.seasonal},
                       {"error", d.components.error}};
    j["transform"] = transform_name(d.transform);
    return j.dump();
}

AnomalyDecision decision_from_json(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad decision JSON: ") + e.what());
    }
    try {
        AnomalyDecision d;
        d.timestamp = j.at("t").get<std::int64_t>();
        d.value = j.at("value").get<double>();
        d.is_anomaly = j.at("anomaly").get<bool>();
        const std::string rule = j.at("rule").get<std::string>();
        if (rule == "continuous_ksigma") d.rule = DecisionRule::continuous_ksigma;
        else if (rule == "discrete_zero") d.rule = DecisionRule::discrete_zero;
        else if (rule == "discrete_zero_normal") d.rule = DecisionRule::discrete_zero_normal;
        else throw DataError("unknown decision rule '" + rule + "'");
        d.expected = j.at("expected").get<double>();
        d.sigma = j.at("sigma").get<double>();
        if (!j.at("score").is_null()) {
            d.score = j.at("score").get<double>();
        }
        const auto& c = j.at("components");
        d.components.trend = c.at("trend").get<double>();
        d.components.seasonal = c.at("seasonal").get<double>();
        d.components.error = c.at("error").get<double>();
        d.transform = transform_from_name(j.at("transform").get<std::string>());
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad decision JSON: ") + e.what());
    }
}

}  // namespace stsad
