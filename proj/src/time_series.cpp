// SPDX-License-Identifier: Apache-2.0
#include "stsad/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "stsad/errors.hpp"

namespace stsad {

void TimeSeries::validate() const {
    if (timestamps.empty()) {
        throw DataError("time series is empty");
    }
    if (timestamps.size() != values.size()) {
        throw DataError("timestamp/value length mismatch");
    }
    if (granularity <= 0) {
        throw DataError("granularity must be positive");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw DataError("non-finite value at index " + std::to_string(i));
        }
        if (i > 0) {
            const std::int64_t gap = timestamps[i] - timestamps[i - 1];
            if (gap <= 0) {
                throw DataError("timestamps not strictly increasing at index " +
                                std::to_string(i));
            }
            if (gap % granularity != 0) {
                throw DataError("gap at index " + std::to_string(i) +
                                " is not a multiple of granularity");
            }
        }
    }
}

void LabeledSeries::validate() const {
    series.validate();
    if (labels.size() != series.size()) {
        throw DataError("label length mismatch for KPI " + kpi_id);
    }
    for (const auto l : labels) {
        if (l > 1) {
            throw DataError("non-binary label for KPI " + kpi_id);
        }
    }
}

std::string transform_name(Transform t) {
    return t == Transform::identity ? "identity" : "log1p";
}

Transform transform_from_name(const std::string& name) {
    if (name == "identity") return Transform::identity;
    if (name == "log1p") return Transform::log1p;
    throw DataError("unknown transform: " + name);
}

std::int64_t infer_granularity(std::span<const std::int64_t> timestamps) {
    if (timestamps.size() < 2) {
        throw DataError("granularity inference needs at least 2 timestamps");
    }
    std::map<std::int64_t, std::size_t> gap_counts;
    std::int64_t g = 0;
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        const std::int64_t gap = timestamps[i] - timestamps[i - 1];
        if (gap <= 0) {
            throw DataError("timestamps not strictly increasing at index " + std::to_string(i));
        }
        ++gap_counts[gap];
        g = std::gcd(g, gap);
    }
    // Modal gap, ties toward the smaller one (std::map iterates in order).
    std::int64_t modal = 0;
    std::size_t best = 0;
    for (const auto& [gap, count] : gap_counts) {
        if (count > best) {
            best = count;
            modal = gap;
        }
    }
    if (g != modal) {
        throw DataError("ambiguous granularity: gcd of gaps " + std::to_string(g) +
                        " differs from modal gap " + std::to_string(modal));
    }
    return g;
}

GridSeries fill_gaps(const TimeSeries& input) {
    input.validate();
    GridSeries out;
    out.series.granularity = input.granularity;
    const std::size_t n = input.size();
    out.series.timestamps.reserve(n);
    out.series.values.reserve(n);
    out.missing.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            std::int64_t t = input.timestamps[i - 1] + input.granularity;
            while (t < input.timestamps[i]) {
                out.series.timestamps.push_back(t);
                out.series.values.push_back(input.values[i - 1]);  // placeholder, never read
                out.missing.push_back(1);
                t += input.granularity;
            }
        }
        out.series.timestamps.push_back(input.timestamps[i]);
        out.series.values.push_back(input.values[i]);
        out.missing.push_back(0);
    }
    return out;
}

double apply_transform(double v, Transform t) {
    if (t == Transform::identity) return v;
    if (v < 0.0) {
        throw DataError("log1p transform requires nonnegative values, got " + std::to_string(v));
    }
    return std::log1p(v);
}

TimeSeries apply_transform(const TimeSeries& input, Transform t) {
    if (t == Transform::identity) return input;
    TimeSeries out = input;
    for (auto& v : out.values) {
        v = apply_transform(v, t);
    }
    return out;
}

double invert_mean(double mean, Transform t) {
    return t == Transform::identity ? mean : std::expm1(mean);
}

Band invert_band(double mean, double sigma, double k, Transform t) {
    return Band{invert_mean(mean, t), invert_mean(mean - k * sigma, t),
                invert_mean(mean + k * sigma, t)};
}

std::pair<TimeSeries, TimeSeries> train_validation_split(const TimeSeries& input, double ratio) {
    const std::size_t n = input.size();
    if (n < 5) {
        throw DataError("train/validation split needs at least 5 points, got " +
                        std::to_string(n));
    }
    const auto n_train =
        static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));
    TimeSeries train{{input.timestamps.begin(), input.timestamps.begin() + n_train},
                     {input.values.begin(), input.values.begin() + n_train},
                     input.granularity};
    TimeSeries val{{input.timestamps.begin() + n_train, input.timestamps.end()},
                   {input.values.begin() + n_train, input.values.end()},
                   input.granularity};
    return {std::move(train), std::move(val)};
}

double masked_variance(std::span<const double> values, std::span<const std::uint8_t> mask) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!mask.empty() && mask[i]) continue;
        sum += values[i];
        ++count;
    }
    if (count < 2) return 0.0;
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!mask.empty() && mask[i]) continue;
        const double d = values[i] - mean;
        ss += d * d;
    }
    return ss / static_cast<double>(count - 1);
}

bool nonnegative_values(std::span<const double> values, std::span<const std::uint8_t> mask) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!mask.empty() && mask[i]) continue;
        if (values[i] < 0.0) return false;
    }
    return true;
}

}  // namespace stsad
