// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stsad/state_space.hpp"
#include "stsad/time_series.hpp"

namespace stsad {

enum class Trend { linear_model, local_level, local_linear };
enum class Seasonal { none, hourly, daily };
enum class ErrorModel { gaussian, ar1, ar2 };

std::string trend_name(Trend t);
std::string seasonal_name(Seasonal s);
std::string error_name(ErrorModel e);

// One candidate model: (trend, seasonal, error, transform).
// String form `trend:seasonal:error:transform` is used in CLI flags,
// reports, and serialized models.
struct StructuralSpec {
    Trend trend{Trend::local_level};
    Seasonal seasonal{Seasonal::none};
    ErrorModel error{ErrorModel::gaussian};
    Transform transform{Transform::identity};

    std::string str() const;
    static StructuralSpec parse(const std::string& text);

    bool operator==(const StructuralSpec&) const = default;
};

// Seasonal period in steps at the given granularity; 0 when inapplicable
// (non-integral period or period < 2).
int seasonal_period(Seasonal s, std::int64_t granularity);

// State-vector extent of each component, for interpretability reports.
struct ComponentLayout {
    int trend_begin{0}, trend_size{0};
    int seasonal_begin{0}, seasonal_size{0};
    int error_begin{0}, error_size{0};
};

// A structural spec lowered to a state-space family with free parameters
// unbound. Owns the parameter packing: the unconstrained vector maps to
// (H, Q-diagonal groups, AR coefficients) via exponential/PACF transforms,
// with floors tied to the training variance.
class ModelFamily {
public:
    // Throws SpecInapplicableError when the seasonal period does not fit the
    // granularity. Dummy seasonal for periods <= 24, trigonometric with
    // K = min(10, s/2) harmonics above that.
    ModelFamily(const StructuralSpec& spec, std::int64_t granularity);

    const StructuralSpec& spec() const { return spec_; }
    std::int64_t granularity() const { return granularity_; }
    int state_dim() const { return state_dim_; }
    int n_params() const { return n_params_; }
    const ComponentLayout& layout() const { return layout_; }
    int seasonal_period_steps() const { return period_; }

    // Floor applied to H and Q diagonals: 1e-8 * (training variance + 1).
    double variance_floor(double train_variance) const;

    // Binds the unconstrained parameter vector. `train_variance` is the
    // sample variance of the (transformed) training data; it scales the
    // variance floor and the diffuse prior 1e7 * (variance + 1).
    StateSpaceModel materialize(const Eigen::VectorXd& theta, double train_variance) const;

    // Natural-scale view of a parameter vector, for reports.
    struct NaturalParams {
        double H{0.0};
        std::vector<double> q_diag;      // one entry per free noise group
        std::vector<std::string> q_names;
        std::vector<double> ar_coef;
        double ar_var{0.0};
    };
    NaturalParams natural(const Eigen::VectorXd& theta, double train_variance) const;

    // Deterministic starting points for the optimizer: method-of-moments
    // informed, unit, and 0.1x unit (in unconstrained coordinates).
    std::vector<Eigen::VectorXd> starts(std::span<const double> y,
                                        std::span<const std::uint8_t> mask) const;

private:
    StructuralSpec spec_;
    std::int64_t granularity_{0};
    int period_{0};
    int state_dim_{0};
    int noise_dim_{0};
    int n_params_{0};
    int n_variance_params_{0};  // leading thetas are variances, then AR pacf
    int ar_order_{0};
    ComponentLayout layout_;
};

// Full cross product trend x seasonal x error x transform with inapplicable
// entries dropped: log1p when negatives are present, seasonal periods that
// are not integral, and seasonal candidates with fewer than two full periods
// of observed training data. Deterministic enumeration order.
std::vector<StructuralSpec> enumerate_suite(std::int64_t granularity,
                                            std::span<const double> train_values,
                                            std::span<const std::uint8_t> train_mask = {});

// Same filter, but also reports why each dropped candidate is inapplicable.
struct SuiteEntry {
    StructuralSpec spec;
    bool applicable{true};
    std::string reason;  // set when not applicable
};
std::vector<SuiteEntry> enumerate_suite_entries(std::int64_t granularity,
                                                std::span<const double> train_values,
                                                std::span<const std::uint8_t> train_mask = {});

}  // namespace stsad
