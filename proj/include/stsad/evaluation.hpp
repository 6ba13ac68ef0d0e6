// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stsad/selection.hpp"
#include "stsad/time_series.hpp"

namespace stsad {

// Delay-adjusted predictions: each maximal contiguous run of label 1s counts
// as fully detected iff any raw prediction fires within `delay_k` points of
// its start (clipped to the run), else fully missed. Points outside runs are
// left untouched.
std::vector<std::uint8_t> adjust_predictions(std::span<const std::uint8_t> labels,
                                             std::span<const std::uint8_t> predictions,
                                             std::size_t delay_k);

struct EvalReport {
    double precision{0.0};
    double recall{0.0};
    double f1{0.0};
    std::uint64_t tp{0}, fp{0}, fn{0}, tn{0};
    std::size_t delay_k{0};
    double threshold_k{0.0};
};

// Adjusts, counts point-wise confusion, and computes the three measures
// (0 when a denominator vanishes).
EvalReport score(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> predictions,
                 std::size_t delay_k);

EvalReport report_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn,
                              std::uint64_t tn, std::size_t delay_k, double threshold_k);

// Per-point record for external plotting, original scale, at `band_k`.
struct SeriesPoint {
    std::int64_t timestamp{0};
    double value{0.0};
    double expected{0.0};
    double band_lo{0.0};
    double band_hi{0.0};
    bool anomaly{false};
};

struct PerSeriesResult {
    std::string kpi_id;
    bool ok{false};
    std::string error;
    std::string winner_spec;
    double winner_mse{0.0};
    std::size_t n_test_points{0};
    // Parallel to the sweep's threshold list.
    std::vector<std::uint64_t> tp, fp, fn, tn;
    std::vector<SeriesPoint> points;
};

struct SweepOptions {
    std::vector<double> thresholds{3.0, 4.0, 5.0, 6.0};
    std::size_t delay_k{7};
    double band_k{4.0};  // k for the emitted per-point band/decision records
    SelectionOptions selection;
    int jobs{1};
    bool keep_points{true};
};

struct SweepResult {
    std::vector<double> thresholds;
    std::size_t delay_k{0};
    std::vector<EvalReport> reports;  // pooled (micro-averaged) per threshold
    std::vector<PerSeriesResult> series;
};

// The evaluation protocol per series: train on the first half (the selection
// window caps it at its trailing two weeks), detect on the second half, pool
// confusion counts across series. Per-series failures are recorded and
// excluded, not fatal. A single detection pass serves every threshold: the
// state update does not depend on k, so predictions at threshold k are
// simply score > k (discrete-rule decisions are k-independent).
SweepResult sweep_thresholds(const std::vector<LabeledSeries>& dataset,
                             const SweepOptions& options = {});

// `threshold,precision,recall,f1,tp,fp,fn` rows, mirroring the report table.
std::string sweep_table_csv(const SweepResult& r);
std::string sweep_table_json(const SweepResult& r);
std::string per_series_json(const SweepResult& r);
std::string points_csv(const PerSeriesResult& s);

}  // namespace stsad
