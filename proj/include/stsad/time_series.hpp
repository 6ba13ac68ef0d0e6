// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stsad {

// Values with |v| at or below this are routed through the discrete zero
// regime. KPI values are normalized floats; exact-0.0 matching is too brittle.
inline constexpr double kZeroTolerance = 1e-12;

inline bool is_zero_value(double v) { return v >= -kZeroTolerance && v <= kZeroTolerance; }

// Uniformly spaced univariate series. Timestamps are epoch seconds, strictly
// increasing; consecutive gaps must be positive integer multiples of
// `granularity` (gaps larger than one step mean missing points).
struct TimeSeries {
    std::vector<std::int64_t> timestamps;
    std::vector<double> values;
    std::int64_t granularity{0};  // seconds per step

    std::size_t size() const { return timestamps.size(); }

    // Throws DataError on any invariant breach.
    void validate() const;
};

struct LabeledSeries {
    TimeSeries series;
    std::vector<std::uint8_t> labels;  // 1 = anomaly
    std::string kpi_id;

    void validate() const;
};

enum class Transform { identity, log1p };

std::string transform_name(Transform t);
Transform transform_from_name(const std::string& name);

// GCD of consecutive gaps, which must equal the modal gap (ties broken toward
// the smaller gap). Tolerates missing points; throws DataError when the gaps
// admit no consistent step.
std::int64_t infer_granularity(std::span<const std::int64_t> timestamps);

// Series expanded onto the complete grid. Inserted points carry a placeholder
// value (the previous observation) and are flagged in `missing`; downstream
// consumers treat them as unobserved and never read the placeholder.
struct GridSeries {
    TimeSeries series;
    std::vector<std::uint8_t> missing;
};

GridSeries fill_gaps(const TimeSeries& input);

double apply_transform(double v, Transform t);
TimeSeries apply_transform(const TimeSeries& input, Transform t);

// Median back-transform of a predictive mean (monotone map; exact for
// identity, exp(m)-1 for log1p).
double invert_mean(double mean, Transform t);

// k-sigma band mapped to the original scale by transforming the endpoints
// pointwise. Monotone, so the anomaly decision boundary is preserved exactly.
struct Band {
    double expected;
    double lo;
    double hi;
};

Band invert_band(double mean, double sigma, double k, Transform t);

// First ceil(ratio*T) points train, remainder validation. Chronological.
std::pair<TimeSeries, TimeSeries> train_validation_split(const TimeSeries& input,
                                                         double ratio = 0.8);

// Sample variance over unmasked entries (0 for fewer than 2 entries).
double masked_variance(std::span<const double> values, std::span<const std::uint8_t> mask);

// True when log1p is admissible: no unmasked value below 0.
bool nonnegative_values(std::span<const double> values, std::span<const std::uint8_t> mask);

}  // namespace stsad
