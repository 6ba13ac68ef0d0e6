// SPDX-License-Identifier: Apache-2.0
//
// stsad — structural time-series anomaly detection CLI.
//
// Subcommands: fit (model selection + persistence), detect (stream or batch
// anomaly decisions), evaluate (score a decision file against labels),
// benchmark (threshold sweep over a labeled dataset).

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stsad/detector.hpp"
#include "stsad/errors.hpp"
#include "stsad/evaluation.hpp"
#include "stsad/io.hpp"
#include "stsad/selection.hpp"

namespace {

using namespace stsad;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitModel = 3;
constexpr int kExitInternal = 4;

std::int64_t parse_duration(const std::string& text) {
    if (text.empty()) {
        throw DataError("empty duration");
    }
    std::int64_t mult = 1;
    std::string digits = text;
    switch (text.back()) {
        case 'd': mult = 86400; digits.pop_back(); break;
        case 'h': mult = 3600; digits.pop_back(); break;
        case 'm': mult = 60; digits.pop_back(); break;
        case 's': mult = 1; digits.pop_back(); break;
        default: break;
    }
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(digits, &used);
        if (used != digits.size() || v <= 0) {
            throw DataError("bad duration '" + text + "'");
        }
        return v * mult;
    } catch (const std::exception&) {
        throw DataError("bad duration '" + text + "' (use e.g. 14d, 12h, 30m, 900s)");
    }
}

std::string safe_filename(const std::string& id) {
    std::string out = id;
    for (auto& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        if (!ok) c = '_';
    }
    return out;
}

const LabeledSeries& pick_series(const std::vector<LabeledSeries>& dataset,
                                 const std::string& kpi_id) {
    if (!kpi_id.empty()) {
        for (const auto& s : dataset) {
            if (s.kpi_id == kpi_id) return s;
        }
        throw DataError("KPI '" + kpi_id + "' not found in input");
    }
    if (dataset.size() == 1) return dataset.front();
    std::string ids;
    for (const auto& s : dataset) ids += " " + s.kpi_id;
    throw DataError("input holds " + std::to_string(dataset.size()) +
                    " KPIs; pick one with --kpi-id:" + ids);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path);
    }
    out << content;
}

struct CommonArgs {
    std::string max_train_window{"14d"};
    int jobs{1};
    std::uint64_t seed{1};
    std::vector<std::string> suite;
};

SelectionOptions make_selection_options(const CommonArgs& args) {
    SelectionOptions sel;
    sel.max_train_window_s = parse_duration(args.max_train_window);
    sel.jobs = args.jobs;
    sel.suite_filter = args.suite;
    return sel;
}

int cmd_fit(const std::string& input, std::vector<std::string> kpi_ids, const std::string& out_dir,
            const CommonArgs& args) {
    const auto dataset = load_series_file(input);
    std::filesystem::create_directories(out_dir);

    std::vector<const LabeledSeries*> targets;
    if (kpi_ids.empty()) {
        for (const auto& s : dataset) targets.push_back(&s);
    } else {
        for (const auto& id : kpi_ids) targets.push_back(&pick_series(dataset, id));
    }

    const SelectionOptions sel = make_selection_options(args);
    bool any_failed = false;
    for (const auto* s : targets) {
        try {
            auto [fitted, report] = select_model(s->series, sel, s->kpi_id);
            const std::string base = out_dir + "/" + safe_filename(s->kpi_id);
            save_fitted_model(fitted, base + ".model.json");
            write_file(base + ".selection.json", selection_report_to_json(report) + "\n");
            const auto& w = report.candidates[static_cast<std::size_t>(report.winner_index)];
            std::cout << s->kpi_id << ": " << fitted.spec.str() << " (validation mse "
                      << w.mse << ", " << base << ".model.json)\n";
        } catch (const Error& e) {
            std::cerr << "stsad fit: " << s->kpi_id << ": " << e.what() << "\n";
            any_failed = true;
        }
    }
    if (any_failed) {
        throw SelectionError("one or more KPIs failed to fit");
    }
    return kExitOk;
}

int cmd_detect(const std::string& model_path, const std::string& input, const std::string& kpi_id,
               double k, const std::string& out_path, bool follow) {
    auto fitted = std::make_shared<FittedModel>(load_fitted_model(model_path));
    const std::int64_t g = fitted->granularity;

    std::ofstream out_file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        out_file.open(out_path);
        if (!out_file) throw DataError("cannot write " + out_path);
        out = &out_file;
    }

    DetectorState state = make_detector(fitted, k);
    std::int64_t next_t = fitted->train_end + g;

    const auto advance_to = [&](std::int64_t t) {
        if (t < next_t || (t - next_t) % g != 0) {
            throw DataError("timestamp " + std::to_string(t) +
                            " is not on the model grid (expected " + std::to_string(next_t) +
                            " + n*" + std::to_string(g) + ")");
        }
        while (next_t < t) {
            state.posterior = advance_posterior(state.model->model, state.posterior, nullptr);
            next_t += g;
        }
    };

    if (follow) {
        std::string line;
        while (std::getline(std::cin, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) {
                throw DataError("stream line needs 'timestamp,value': " + line);
            }
            const std::int64_t t = std::stoll(line.substr(0, comma));
            const double v = std::stod(line.substr(comma + 1));
            advance_to(t);
            auto [decision, next] = decide_point(state, t, v);
            state = std::move(next);
            next_t = t + g;
            *out << decision_to_json(decision) << "\n" << std::flush;
        }
        return kExitOk;
    }

    const auto dataset = load_series_file(input);
    const LabeledSeries& series = pick_series(dataset, kpi_id);
    if (series.series.granularity != g && series.series.size() > 1) {
        throw DataError("granularity mismatch: model " + std::to_string(g) + "s, series " +
                        std::to_string(series.series.granularity) + "s");
    }
    const std::int64_t first = series.series.timestamps.front();
    if (first != next_t) {
        if (first > next_t && (first - next_t) % g == 0) {
            advance_to(first);
        } else if ((first - fitted->train_end) % g == 0 && first <= fitted->train_end) {
            throw DataError("series starts inside the training window (train_end " +
                            std::to_string(fitted->train_end) + ")");
        } else if ((first - fitted->train_end) % g != 0) {
            throw DataError("series is not phase-aligned with the model grid");
        }
    }
    GridSeries grid = fill_gaps(series.series);
    grid.series.granularity = g;
    DetectorState s = state;
    for (const auto& d : detect_series(s, grid.series, grid.missing)) {
        *out << decision_to_json(d) << "\n";
    }
    return kExitOk;
}

int cmd_evaluate(const std::string& labels_path, const std::string& kpi_id,
                 const std::string& predictions_path, std::size_t delay_k,
                 const std::string& out_csv) {
    const auto dataset = load_series_file(labels_path);
    const LabeledSeries& series = pick_series(dataset, kpi_id);

    std::ifstream in(predictions_path);
    if (!in) throw DataError("cannot open " + predictions_path);
    std::map<std::int64_t, bool> pred_by_t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const AnomalyDecision d = decision_from_json(line);
        pred_by_t[d.timestamp] = d.is_anomaly;
    }

    std::vector<std::uint8_t> preds(series.series.size(), 0);
    std::size_t missing = 0;
    for (std::size_t i = 0; i < series.series.size(); ++i) {
        const auto it = pred_by_t.find(series.series.timestamps[i]);
        if (it == pred_by_t.end()) {
            ++missing;
        } else if (it->second) {
            preds[i] = 1;
        }
    }
    const EvalReport r = score(series.labels, preds, delay_k);

    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["kpi_id"] = series.kpi_id;
    j["delay_k"] = delay_k;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["tp"] = r.tp;
    j["fp"] = r.fp;
    j["fn"] = r.fn;
    j["tn"] = r.tn;
    j["points_without_predictions"] = missing;
    std::cout << j.dump(2) << "\n";

    if (!out_csv.empty()) {
        std::ostringstream csv;
        csv << "threshold,precision,recall,f1,tp,fp,fn\n";
        char buf[256];
        std::snprintf(buf, sizeof(buf), "-,%.6f,%.6f,%.6f,%llu,%llu,%llu\n", r.precision,
                      r.recall, r.f1, static_cast<unsigned long long>(r.tp),
                      static_cast<unsigned long long>(r.fp),
                      static_cast<unsigned long long>(r.fn));
        csv << buf;
        write_file(out_csv, csv.str());
    }
    return kExitOk;
}

int cmd_benchmark(const std::string& input, std::vector<std::string> kpi_ids,
                  std::size_t max_series, const std::string& thresholds_arg, std::size_t delay_k,
                  double band_k, bool no_points, const std::string& out_dir,
                  const CommonArgs& args) {
    auto dataset = load_series_file(input);
    if (!kpi_ids.empty()) {
        std::vector<LabeledSeries> subset;
        for (const auto& id : kpi_ids) subset.push_back(pick_series(dataset, id));
        dataset = std::move(subset);
    }
    if (max_series > 0 && dataset.size() > max_series) {
        dataset.resize(max_series);
    }
    if (dataset.empty()) {
        throw DataError("no series to benchmark");
    }

    SweepOptions options;
    options.thresholds.clear();
    {
        std::stringstream ss(thresholds_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) options.thresholds.push_back(std::stod(tok));
        }
        if (options.thresholds.empty()) {
            throw DataError("no thresholds given");
        }
    }
    options.delay_k = delay_k;
    options.band_k = band_k;
    options.keep_points = !no_points;
    options.jobs = args.jobs;
    options.selection = make_selection_options(args);
    options.selection.jobs = 1;

    const SweepResult result = sweep_thresholds(dataset, options);

    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/report.csv", sweep_table_csv(result));
    write_file(out_dir + "/report.json", sweep_table_json(result) + "\n");
    write_file(out_dir + "/per_series.json", per_series_json(result) + "\n");
    if (!no_points) {
        std::filesystem::create_directories(out_dir + "/points");
        for (const auto& s : result.series) {
            if (!s.ok) continue;
            write_file(out_dir + "/points/" + safe_filename(s.kpi_id) + ".points.csv",
                       points_csv(s));
        }
    }

    std::size_t failed = 0;
    for (const auto& s : result.series) {
        if (!s.ok) {
            ++failed;
            std::cerr << "stsad benchmark: skipped " << s.kpi_id << ": " << s.error << "\n";
        }
    }
    std::cout << sweep_table_csv(result);
    std::cerr << "benchmark: " << (result.series.size() - failed) << "/" << result.series.size()
              << " series evaluated, outputs in " << out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stsad — structural time-series anomaly detection"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a TOML/INI file (flags win)");

    CommonArgs common;

    // fit
    auto* fit = app.add_subcommand("fit", "select and persist a model per KPI");
    std::string fit_input, fit_out{"."};
    std::vector<std::string> fit_kpis;
    fit->add_option("--input", fit_input, "KPI CSV or series JSON")->required();
    fit->add_option("--kpi-id", fit_kpis, "KPI(s) to fit (default: all in the file)");
    fit->add_option("--out", fit_out, "output directory");
    fit->add_option("--max-train-window", common.max_train_window, "trailing window, e.g. 14d");
    fit->add_option("--jobs", common.jobs, "parallel candidate fits");
    fit->add_option("--suite", common.suite, "restrict to these spec strings");
    fit->add_option("--seed", common.seed, "reserved; the pipeline is deterministic");

    // detect
    auto* detect = app.add_subcommand("detect", "emit anomaly decisions as JSON lines");
    std::string det_model, det_input, det_kpi, det_out;
    double det_k = 4.0;
    bool det_follow = false;
    detect->add_option("--model", det_model, "fitted model JSON")->required();
    detect->add_option("--input", det_input, "test series (CSV or JSON)");
    detect->add_option("--kpi-id", det_kpi, "KPI to pick from the input file");
    detect->add_option("--k", det_k, "sigma multiplier (default 4)");
    detect->add_option("--out", det_out, "output path (default stdout)");
    detect->add_flag("--follow", det_follow, "read 'timestamp,value' lines from stdin");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score a decision file against labels");
    std::string ev_labels, ev_kpi, ev_preds, ev_csv;
    std::size_t ev_delay = 7;
    evaluate->add_option("--labels", ev_labels, "labeled KPI CSV or series JSON")->required();
    evaluate->add_option("--kpi-id", ev_kpi, "KPI to pick");
    evaluate->add_option("--predictions", ev_preds, "decision JSON-lines file")->required();
    evaluate->add_option("--delay", ev_delay, "permitted detection delay in points");
    evaluate->add_option("--out-csv", ev_csv, "also write a one-row CSV report");

    // benchmark
    auto* benchmark = app.add_subcommand("benchmark", "threshold sweep over a labeled dataset");
    std::string bm_input, bm_out{"benchmark_out"}, bm_thresholds{"3,4,5,6"};
    std::vector<std::string> bm_kpis;
    std::size_t bm_delay = 7, bm_max_series = 0;
    double bm_band_k = 4.0;
    bool bm_no_points = false;
    benchmark->add_option("--input", bm_input, "labeled KPI CSV")->required();
    benchmark->add_option("--kpi-id", bm_kpis, "subset of KPIs");
    benchmark->add_option("--max-series", bm_max_series, "cap on number of series (0 = all)");
    benchmark->add_option("--thresholds", bm_thresholds, "comma-separated k values");
    benchmark->add_option("--delay", bm_delay, "permitted detection delay in points");
    benchmark->add_option("--band-k", bm_band_k, "k for per-point band output");
    benchmark->add_flag("--no-points", bm_no_points, "skip per-point CSV emission");
    benchmark->add_option("--out", bm_out, "output directory");
    benchmark->add_option("--max-train-window", common.max_train_window, "trailing window");
    benchmark->add_option("--jobs", common.jobs, "parallel series evaluations");
    benchmark->add_option("--suite", common.suite, "restrict candidate specs");
    benchmark->add_option("--seed", common.seed, "reserved; the pipeline is deterministic");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    try {
        if (fit->parsed()) {
            return cmd_fit(fit_input, fit_kpis, fit_out, common);
        }
        if (detect->parsed()) {
            if (!det_follow && det_input.empty()) {
                throw DataError("detect needs --input (or --follow for streaming)");
            }
            return cmd_detect(det_model, det_input, det_kpi, det_k, det_out, det_follow);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(ev_labels, ev_kpi, ev_preds, ev_delay, ev_csv);
        }
        if (benchmark->parsed()) {
            return cmd_benchmark(bm_input, bm_kpis, bm_max_series, bm_thresholds, bm_delay,
                                 bm_band_k, bm_no_points, bm_out, common);
        }
    } catch (const DataError& e) {
        std::cerr << "stsad: " << e.what() << "\n";
        return kExitInput;
    } catch (const FitError& e) {
        std::cerr << "stsad: " << e.what() << "\n";
        return kExitModel;
    } catch (const SelectionError& e) {
        std::cerr << "stsad: " << e.what() << "\n";
        return kExitModel;
    } catch (const FilterError& e) {
        std::cerr << "stsad: " << e.what() << "\n";
        return kExitModel;
    } catch (const std::exception& e) {
        std::cerr << "stsad: internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}
