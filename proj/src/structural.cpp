// SPDX-License-Identifier: Apache-2.0
#include "stsad/structural.hpp"

#include <cmath>
#include <numbers>

#include "stsad/errors.hpp"
#include "stsad/param_map.hpp"

namespace stsad {

namespace {

constexpr double kFloorScale = 1e-8;   // variance floor = kFloorScale * (var + 1)
constexpr double kDiffuseKappa = 1e7;  // diffuse P1 diagonal = kappa * (var + 1)
constexpr int kMaxHarmonics = 10;
constexpr int kDummySeasonalMax = 24;  // dummy representation up to this period

std::vector<std::string> split_colon(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(':', start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

}  // namespace

std::string trend_name(Trend t) {
    switch (t) {
        case Trend::linear_model: return "linear_model";
        case Trend::local_level: return "local_level";
        case Trend::local_linear: return "local_linear";
    }
    return "?";
}

std::string seasonal_name(Seasonal s) {
    switch (s) {
        case Seasonal::none: return "none";
        case Seasonal::hourly: return "hourly";
        case Seasonal::daily: return "daily";
    }
    return "?";
}

std::string error_name(ErrorModel e) {
    switch (e) {
        case ErrorModel::gaussian: return "gaussian";
        case ErrorModel::ar1: return "ar1";
        case ErrorModel::ar2: return "ar2";
    }
    return "?";
}

std::string StructuralSpec::str() const {
    return trend_name(trend) + ":" + seasonal_name(seasonal) + ":" + error_name(error) + ":" +
           transform_name(transform);
}

StructuralSpec StructuralSpec::parse(const std::string& text) {
    const auto parts = split_colon(text);
    if (parts.size() != 4) {
        throw DataError("bad structural spec '" + text + "', want trend:seasonal:error:transform");
    }
    StructuralSpec s;
    if (parts[0] == "linear_model") s.trend = Trend::linear_model;
    else if (parts[0] == "local_level") s.trend = Trend::local_level;
    else if (parts[0] == "local_linear") s.trend = Trend::local_linear;
    else throw DataError("unknown trend '" + parts[0] + "'");
    if (parts[1] == "none") s.seasonal = Seasonal::none;
    else if (parts[1] == "hourly") s.seasonal = Seasonal::hourly;
    else if (parts[1] == "daily") s.seasonal = Seasonal::daily;
    else throw DataError("unknown seasonal '" + parts[1] + "'");
    if (parts[2] == "gaussian") s.error = ErrorModel::gaussian;
    else if (parts[2] == "ar1") s.error = ErrorModel::ar1;
    else if (parts[2] == "ar2") s.error = ErrorModel::ar2;
    else throw DataError("unknown error model '" + parts[2] + "'");
    s.transform = transform_from_name(parts[3]);
    return s;
}

int seasonal_period(Seasonal s, std::int64_t granularity) {
    if (s == Seasonal::none || granularity <= 0) return 0;
    const std::int64_t cycle = s == Seasonal::hourly ? 3600 : 86400;
    if (cycle % granularity != 0) return 0;
    const std::int64_t period = cycle / granularity;
    return period >= 2 ? static_cast<int>(period) : 0;
}

ModelFamily::ModelFamily(const StructuralSpec& spec, std::int64_t granularity)
    : spec_(spec), granularity_(granularity) {
    int dim = 0;
    int noise = 0;
    int n_var = 0;

    layout_.trend_begin = 0;
    switch (spec.trend) {
        case Trend::linear_model:
            layout_.trend_size = 2;  // deterministic level + slope, no noise
            break;
        case Trend::local_level:
            layout_.trend_size = 1;
            noise += 1;
            n_var += 1;
            break;
        case Trend::local_linear:
            layout_.trend_size = 2;
            noise += 2;
            n_var += 2;
            break;
    }
    dim += layout_.trend_size;

    layout_.seasonal_begin = dim;
    if (spec.seasonal != Seasonal::none) {
        period_ = seasonal_period(spec.seasonal, granularity);
        if (period_ == 0) {
            throw SpecInapplicableError("seasonal period for " + seasonal_name(spec.seasonal) +
                                        " is not an integer >= 2 at granularity " +
                                        std::to_string(granularity) + "s");
        }
        if (period_ <= kDummySeasonalMax) {
            layout_.seasonal_size = period_ - 1;
            noise += 1;  // noise enters the current-season state only
        } else {
            const int harmonics = std::min(kMaxHarmonics, period_ / 2);
            layout_.seasonal_size = 2 * harmonics;
            noise += layout_.seasonal_size;  // shared variance across all states
        }
        n_var += 1;
    }
    dim += layout_.seasonal_size;

    layout_.error_begin = dim;
    if (spec.error == ErrorModel::gaussian) {
        n_var += 1;  // H
    } else {
        ar_order_ = spec.error == ErrorModel::ar1 ? 1 : 2;
        layout_.error_size = ar_order_;
        noise += 1;
        n_var += 1;  // AR innovation variance (H pinned to the floor)
    }
    dim += layout_.error_size;

    state_dim_ = dim;
    noise_dim_ = noise;
    n_variance_params_ = n_var;
    n_params_ = n_var + ar_order_;
}

double ModelFamily::variance_floor(double train_variance) const {
    return kFloorScale * (train_variance + 1.0);
}

StateSpaceModel ModelFamily::materialize(const Eigen::VectorXd& theta,
                                         double train_variance) const {
    if (theta.size() != n_params_) {
        throw DataError("parameter vector size " + std::to_string(theta.size()) + ", want " +
                        std::to_string(n_params_));
    }
    const double floor = variance_floor(train_variance);
    const double kappa = kDiffuseKappa * (train_variance + 1.0);
    const int m = state_dim_;

    StateSpaceModel model;
    model.Z = Eigen::RowVectorXd::Zero(m);
    model.T = Eigen::MatrixXd::Zero(m, m);
    model.R = Eigen::MatrixXd::Zero(m, noise_dim_);
    model.Q = Eigen::MatrixXd::Zero(noise_dim_, noise_dim_);
    model.c = Eigen::VectorXd::Zero(m);
    model.a1 = Eigen::VectorXd::Zero(m);
    model.P1 = Eigen::MatrixXd::Zero(m, m);
    model.diffuse.assign(m, 0);

    int next_theta = 0;
    double H = 0.0;
    if (spec_.error == ErrorModel::gaussian) {
        H = theta_to_variance(theta(next_theta++), floor);
    } else {
        H = floor;  // the AR block carries the serial error
    }
    model.H = H;

    int col = 0;

    // Trend block.
    {
        const int b = layout_.trend_begin;
        switch (spec_.trend) {
            case Trend::linear_model:
                model.T(b, b) = 1.0;
                model.T(b, b + 1) = 1.0;
                model.T(b + 1, b + 1) = 1.0;
                model.Z(b) = 1.0;
                model.diffuse[b] = 1;
                model.diffuse[b + 1] = 1;
                model.P1(b, b) = kappa;
                model.P1(b + 1, b + 1) = kappa;
                break;
            case Trend::local_level: {
                model.T(b, b) = 1.0;
                model.Z(b) = 1.0;
                model.diffuse[b] = 1;
                model.P1(b, b) = kappa;
                const double q = theta_to_variance(theta(next_theta++), floor);
                model.R(b, col) = 1.0;
                model.Q(col, col) = q;
                ++col;
                break;
            }
            case Trend::local_linear: {
                model.T(b, b) = 1.0;
                model.T(b, b + 1) = 1.0;
                model.T(b + 1, b + 1) = 1.0;
                model.Z(b) = 1.0;
                model.diffuse[b] = 1;
                model.diffuse[b + 1] = 1;
                model.P1(b, b) = kappa;
                model.P1(b + 1, b + 1) = kappa;
                const double q_level = theta_to_variance(theta(next_theta++), floor);
                const double q_slope = theta_to_variance(theta(next_theta++), floor);
                model.R(b, col) = 1.0;
                model.Q(col, col) = q_level;
                ++col;
                model.R(b + 1, col) = 1.0;
                model.Q(col, col) = q_slope;
                ++col;
                break;
            }
        }
    }

    // Seasonal block.
    if (layout_.seasonal_size > 0) {
        const int b = layout_.seasonal_begin;
        const int sz = layout_.seasonal_size;
        const double q_seas = theta_to_variance(theta(next_theta++), floor);
        if (period_ <= kDummySeasonalMax) {
            // Dummy-variable seasonal: gamma_t = -(sum of previous s-1 states) + noise.
            for (int j = 0; j < sz; ++j) {
                model.T(b, b + j) = -1.0;
                if (j + 1 < sz) {
                    model.T(b + j + 1, b + j) = 1.0;
                }
                model.diffuse[b + j] = 1;
                model.P1(b + j, b + j) = kappa;
            }
            model.Z(b) = 1.0;
            model.R(b, col) = 1.0;
            model.Q(col, col) = q_seas;
            ++col;
        } else {
            const int harmonics = sz / 2;
            for (int j = 0; j < harmonics; ++j) {
                const double lambda = 2.0 * std::numbers::pi * (j + 1) / period_;
                const int r0 = b + 2 * j;
                model.T(r0, r0) = std::cos(lambda);
                model.T(r0, r0 + 1) = std::sin(lambda);
                model.T(r0 + 1, r0) = -std::sin(lambda);
                model.T(r0 + 1, r0 + 1) = std::cos(lambda);
                model.Z(r0) = 1.0;
                for (int k = 0; k < 2; ++k) {
                    model.diffuse[r0 + k] = 1;
                    model.P1(r0 + k, r0 + k) = kappa;
                    model.R(r0 + k, col) = 1.0;
                    model.Q(col, col) = q_seas;
                    ++col;
                }
            }
        }
    }

    // Error block.
    if (ar_order_ > 0) {
        const int b = layout_.error_begin;
        const double q_ar = theta_to_variance(theta(next_theta++), floor);
        const auto z = theta.segment(next_theta, ar_order_);
        next_theta += ar_order_;
        const std::vector<double> zv(z.data(), z.data() + z.size());
        const auto phi = pacf_to_ar(zv);
        for (int j = 0; j < ar_order_; ++j) {
            model.T(b, b + j) = phi[static_cast<std::size_t>(j)];
            if (j + 1 < ar_order_) {
                model.T(b + j + 1, b + j) = 1.0;
            }
        }
        model.Z(b) = 1.0;
        model.R(b, col) = 1.0;
        model.Q(col, col) = q_ar;
        ++col;
        // Stationary initial covariance; the AR block is not diffuse.
        const auto gamma = ar_stationary_autocov(phi, q_ar);
        if (ar_order_ == 1) {
            model.P1(b, b) = gamma[0];
        } else {
            model.P1(b, b) = gamma[0];
            model.P1(b + 1, b + 1) = gamma[0];
            model.P1(b, b + 1) = gamma[1];
            model.P1(b + 1, b) = gamma[1];
        }
    }

    return model;
}

ModelFamily::NaturalParams ModelFamily::natural(const Eigen::VectorXd& theta,
                                                double train_variance) const {
    const double floor = variance_floor(train_variance);
    NaturalParams out;
    int next = 0;
    if (spec_.error == ErrorModel::gaussian) {
        out.H = theta_to_variance(theta(next++), floor);
    } else {
        out.H = floor;
    }
    if (spec_.trend == Trend::local_level) {
        out.q_diag.push_back(theta_to_variance(theta(next++), floor));
        out.q_names.push_back("level");
    } else if (spec_.trend == Trend::local_linear) {
        out.q_diag.push_back(theta_to_variance(theta(next++), floor));
        out.q_names.push_back("level");
        out.q_diag.push_back(theta_to_variance(theta(next++), floor));
        out.q_names.push_back("slope");
    }
    if (spec_.seasonal != Seasonal::none) {
        out.q_diag.push_back(theta_to_variance(theta(next++), floor));
        out.q_names.push_back("seasonal");
    }
    if (ar_order_ > 0) {
        out.ar_var = theta_to_variance(theta(next++), floor);
        out.q_diag.push_back(out.ar_var);
        out.q_names.push_back("ar");
        std::vector<double> z(theta.data() + next, theta.data() + next + ar_order_);
        out.ar_coef = pacf_to_ar(z);
    }
    return out;
}

std::vector<Eigen::VectorXd> ModelFamily::starts(std::span<const double> y,
                                                 std::span<const std::uint8_t> mask) const {
    // Variance of consecutive observed first differences.
    double diff_var = 0.0;
    {
        std::vector<double> diffs;
        diffs.reserve(y.size());
        bool have_prev = false;
        double prev = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const bool masked = !mask.empty() && mask[i] != 0;
            if (masked) {
                have_prev = false;
                continue;
            }
            if (have_prev) diffs.push_back(y[i] - prev);
            prev = y[i];
            have_prev = true;
        }
        diff_var = masked_variance(diffs, {});
    }

    const int n_groups = std::max(1, n_variance_params_ - (spec_.error == ErrorModel::gaussian));
    const double mom_h = std::max(0.25 * diff_var, 1e-10);
    const double mom_q = std::max(0.5 * diff_var / n_groups, 1e-10);

    std::vector<Eigen::VectorXd> starts;
    Eigen::VectorXd mom(n_params_);
    int next = 0;
    if (spec_.error == ErrorModel::gaussian) {
        mom(next++) = std::log(mom_h);
    }
    while (next < n_variance_params_) {
        mom(next++) = std::log(mom_q);
    }
    for (int j = 0; j < ar_order_; ++j) {
        mom(next++) = j == 0 ? std::atanh(0.5) : 0.0;
    }
    starts.push_back(mom);

    Eigen::VectorXd unit = Eigen::VectorXd::Zero(n_params_);
    starts.push_back(unit);

    Eigen::VectorXd tenth = Eigen::VectorXd::Zero(n_params_);
    for (int i = 0; i < n_variance_params_; ++i) {
        tenth(i) = std::log(0.1);
    }
    starts.push_back(tenth);
    return starts;
}

std::vector<SuiteEntry> enumerate_suite_entries(std::int64_t granularity,
                                                std::span<const double> train_values,
                                                std::span<const std::uint8_t> train_mask) {
    const bool nonneg = nonnegative_values(train_values, train_mask);
    std::size_t observed = 0;
    for (std::size_t i = 0; i < train_values.size(); ++i) {
        if (train_mask.empty() || train_mask[i] == 0) ++observed;
    }

    std::vector<SuiteEntry> out;
    out.reserve(54);
    for (const Trend trend : {Trend::linear_model, Trend::local_level, Trend::local_linear}) {
        for (const Seasonal seasonal : {Seasonal::none, Seasonal::hourly, Seasonal::daily}) {
            for (const ErrorModel error : {ErrorModel::gaussian, ErrorModel::ar1, ErrorModel::ar2}) {
                for (const Transform transform : {Transform::identity, Transform::log1p}) {
                    SuiteEntry entry;
                    entry.spec = StructuralSpec{trend, seasonal, error, transform};
                    if (transform == Transform::log1p && !nonneg) {
                        entry.applicable = false;
                        entry.reason = "log1p requires nonnegative training values";
                    } else if (seasonal != Seasonal::none) {
                        const int s = seasonal_period(seasonal, granularity);
                        if (s == 0) {
                            entry.applicable = false;
                            entry.reason = "seasonal period not an integer >= 2 at granularity " +
                                           std::to_string(granularity) + "s";
                        } else if (observed < 2 * static_cast<std::size_t>(s)) {
                            entry.applicable = false;
                            entry.reason = "fewer than two full seasonal periods observed";
                        }
                    }
                    out.push_back(std::move(entry));
                }
            }
        }
    }
    return out;
}

std::vector<StructuralSpec> enumerate_suite(std::int64_t granularity,
                                            std::span<const double> train_values,
                                            std::span<const std::uint8_t> train_mask) {
    std::vector<StructuralSpec> out;
    for (auto& entry : enumerate_suite_entries(granularity, train_values, train_mask)) {
        if (entry.applicable) out.push_back(entry.spec);
    }
    return out;
}

}  // namespace stsad
