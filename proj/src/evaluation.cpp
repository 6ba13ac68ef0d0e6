// SPDX-License-Identifier: Apache-2.0
#include "stsad/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stsad/detector.hpp"
#include "stsad/errors.hpp"
#include "stsad/parallel.hpp"

namespace stsad {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double v, const char* fmt = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

void evaluate_one_series(const LabeledSeries& input, const SweepOptions& options,
                         PerSeriesResult& out) {
    out.kpi_id = input.kpi_id;
    out.tp.assign(options.thresholds.size(), 0);
    out.fp.assign(options.thresholds.size(), 0);
    out.fn.assign(options.thresholds.size(), 0);
    out.tn.assign(options.thresholds.size(), 0);

    input.validate();
    const GridSeries grid = fill_gaps(input.series);
    const std::size_t n = grid.series.size();
    if (n < 100) {
        throw DataError("series too short for the half-split protocol: " + std::to_string(n) +
                        " grid points");
    }

    // Labels aligned to the grid; inserted points carry no label.
    std::vector<std::int8_t> grid_labels(n, -1);
    {
        std::size_t src = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!grid.missing[i]) {
                grid_labels[i] = static_cast<std::int8_t>(input.labels[src++]);
            }
        }
    }

    const std::size_t half = n / 2;
    TimeSeries train;
    train.granularity = grid.series.granularity;
    train.timestamps.assign(grid.series.timestamps.begin(),
                            grid.series.timestamps.begin() + half);
    train.values.assign(grid.series.values.begin(), grid.series.values.begin() + half);

    SelectionOptions sel = options.selection;
    sel.jobs = 1;  // series-level parallelism only
    auto [fitted, report] = select_model(train, sel, input.kpi_id);
    out.winner_spec = fitted.spec.str();
    out.winner_mse = report.candidates[static_cast<std::size_t>(report.winner_index)].mse;

    // One detection pass over the test half.
    DetectorState state = make_detector(std::make_shared<FittedModel>(std::move(fitted)),
                                        options.band_k);
    std::vector<std::uint8_t> labels;
    std::vector<std::uint8_t> continuous;  // 1 when the k-sigma rule applies
    std::vector<double> scores;            // defined where continuous
    std::vector<std::uint8_t> discrete_anomaly;
    labels.reserve(n - half);

    for (std::size_t i = half; i < n; ++i) {
        if (grid.missing[i]) {
            state.posterior = advance_posterior(state.model->model, state.posterior, nullptr);
            continue;
        }
        auto [d, next] = decide_point(state, grid.series.timestamps[i], grid.series.values[i]);
        state = std::move(next);
        labels.push_back(static_cast<std::uint8_t>(grid_labels[i]));
        continuous.push_back(d.rule == DecisionRule::continuous_ksigma ? 1 : 0);
        scores.push_back(d.score ? *d.score : 0.0);
        discrete_anomaly.push_back(d.rule == DecisionRule::discrete_zero ? 1 : 0);
        if (options.keep_points) {
            const Band band =
                invert_band(d.expected, d.sigma, options.band_k, d.transform);
            out.points.push_back(SeriesPoint{d.timestamp, d.value, band.expected, band.lo,
                                             band.hi, d.is_anomaly});
        }
    }
    out.n_test_points = labels.size();

    for (std::size_t ki = 0; ki < options.thresholds.size(); ++ki) {
        const double k = options.thresholds[ki];
        std::vector<std::uint8_t> preds(labels.size(), 0);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            preds[i] = continuous[i] ? (scores[i] > k ? 1 : 0) : discrete_anomaly[i];
        }
        const EvalReport r = score(labels, preds, options.delay_k);
        out.tp[ki] = r.tp;
        out.fp[ki] = r.fp;
        out.fn[ki] = r.fn;
        out.tn[ki] = r.tn;
    }
    out.ok = true;
}

}  // namespace

std::vector<std::uint8_t> adjust_predictions(std::span<const std::uint8_t> labels,
                                             std::span<const std::uint8_t> predictions,
                                             std::size_t delay_k) {
    if (labels.size() != predictions.size()) {
        throw DataError("label/prediction length mismatch");
    }
    std::vector<std::uint8_t> adjusted(predictions.begin(), predictions.end());
    const std::size_t n = labels.size();
    std::size_t i = 0;
    while (i < n) {
        if (!labels[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && labels[j]) ++j;  // segment [i, j)
        std::size_t window_last = j - 1;
        if (delay_k < window_last - i) {
            window_last = i + delay_k;
        }
        bool hit = false;
        for (std::size_t p = i; p <= window_last; ++p) {
            if (predictions[p]) {
                hit = true;
                break;
            }
        }
        for (std::size_t p = i; p < j; ++p) {
            adjusted[p] = hit ? 1 : 0;
        }
        i = j;
    }
    return adjusted;
}

EvalReport report_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn,
                              std::uint64_t tn, std::size_t delay_k, double threshold_k) {
    EvalReport r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.tn = tn;
    r.delay_k = delay_k;
    r.threshold_k = threshold_k;
    r.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    r.recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    r.f1 = (r.precision + r.recall) == 0.0
               ? 0.0
               : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

EvalReport score(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> predictions,
                 std::size_t delay_k) {
    const auto adjusted = adjust_predictions(labels, predictions, delay_k);
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] && adjusted[i]) ++tp;
        else if (!labels[i] && adjusted[i]) ++fp;
        else if (labels[i] && !adjusted[i]) ++fn;
        else ++tn;
    }
    return report_from_counts(tp, fp, fn, tn, delay_k, 0.0);
}

SweepResult sweep_thresholds(const std::vector<LabeledSeries>& dataset,
                             const SweepOptions& options) {
    if (options.thresholds.empty()) {
        throw DataError("threshold sweep needs at least one k");
    }
    SweepResult result;
    result.thresholds = options.thresholds;
    result.delay_k = options.delay_k;
    result.series.resize(dataset.size());

    parallel_for(dataset.size(), options.jobs, [&](std::size_t i) {
        PerSeriesResult& out = result.series[i];
        try {
            evaluate_one_series(dataset[i], options, out);
        } catch (const Error& e) {
            out.kpi_id = dataset[i].kpi_id;
            out.ok = false;
            out.error = e.what();
        }
    });

    for (std::size_t ki = 0; ki < options.thresholds.size(); ++ki) {
        std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (const auto& s : result.series) {
            if (!s.ok) continue;
            tp += s.tp[ki];
            fp += s.fp[ki];
            fn += s.fn[ki];
            tn += s.tn[ki];
        }
        result.reports.push_back(
            report_from_counts(tp, fp, fn, tn, options.delay_k, options.thresholds[ki]));
    }
    return result;
}

std::string sweep_table_csv(const SweepResult& r) {
    std::ostringstream out;
    out << "threshold,precision,recall,f1,tp,fp,fn\n";
    for (const auto& rep : r.reports) {
        out << fmt_double(rep.threshold_k, "%g") << ',' << fmt_double(rep.precision, "%.6f")
            << ',' << fmt_double(rep.recall, "%.6f") << ',' << fmt_double(rep.f1, "%.6f") << ','
            << rep.tp << ',' << rep.fp << ',' << rep.fn << "\n";
    }
    return out.str();
}

std::string sweep_table_json(const SweepResult& r) {
    ordered_json j;
    j["schema_version"] = 1;
    j["delay_k"] = r.delay_k;
    auto rows = ordered_json::array();
    for (const auto& rep : r.reports) {
        rows.push_back({{"threshold", rep.threshold_k},
                        {"precision", rep.precision},
                        {"recall", rep.recall},
                        {"f1", rep.f1},
                        {"tp", rep.tp},
                        {"fp", rep.fp},
                        {"fn", rep.fn},
                        {"tn", rep.tn}});
    }
    j["rows"] = std::move(rows);
    return j.dump(2);
}

std::string per_series_json(const SweepResult& r) {
    ordered_json j;
    j["schema_version"] = 1;
    j["delay_k"] = r.delay_k;
    j["thresholds"] = r.thresholds;
    auto arr = ordered_json::array();
    for (const auto& s : r.series) {
        ordered_json e;
        e["kpi_id"] = s.kpi_id;
        e["ok"] = s.ok;
        if (!s.ok) {
            e["error"] = s.error;
        } else {
            e["winner_spec"] = s.winner_spec;
            e["winner_validation_mse"] = s.winner_mse;
            e["n_test_points"] = s.n_test_points;
            e["tp"] = s.tp;
            e["fp"] = s.fp;
            e["fn"] = s.fn;
            e["tn"] = s.tn;
        }
        arr.push_back(std::move(e));
    }
    j["series"] = std::move(arr);
    return j.dump(2);
}

std::string points_csv(const PerSeriesResult& s) {
    std::ostringstream out;
    out << "timestamp,value,expected,band_low,band_high,decision\n";
    for (const auto& p : s.points) {
        out << p.timestamp << ',' << fmt_double(p.value) << ',' << fmt_double(p.expected) << ','
            << fmt_double(p.band_lo) << ',' << fmt_double(p.band_hi) << ',' << (p.anomaly ? 1 : 0)
            << "\n";
    }
    return out.str();
}

}  // namespace stsad
