// SPDX-License-Identifier: Apache-2.0
#include "stsad/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stsad/errors.hpp"
#include "stsad/parallel.hpp"

namespace stsad {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<double> eigen_to_vec(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd vec_to_eigen(const std::vector<double>& v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

// Transform a window of values; masked entries become 0 placeholders and are
// never read downstream. An unmasked value outside the transform domain
// throws, failing the candidate.
std::vector<double> transform_window(std::span<const double> values,
                                     std::span<const std::uint8_t> mask, Transform t) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const bool masked = !mask.empty() && mask[i] != 0;
        out[i] = masked ? 0.0 : apply_transform(values[i], t);
    }
    return out;
}

}  // namespace

int pick_winner(std::span<const CandidateResult> candidates) {
    int winner = -1;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        if (!c.ok()) continue;
        if (winner < 0) {
            winner = static_cast<int>(i);
            continue;
        }
        const auto& w = candidates[static_cast<std::size_t>(winner)];
        if (c.mse < w.mse || (c.mse == w.mse && c.n_params < w.n_params)) {
            winner = static_cast<int>(i);
        }
    }
    return winner;
}

double validation_mse(std::span<const double> predictions, std::span<const double> actuals) {
    if (predictions.size() != actuals.size()) {
        throw DataError("prediction/actual length mismatch");
    }
    if (predictions.empty()) {
        throw DataError("validation MSE of empty input");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - actuals[i];
        sum += d * d;
    }
    return sum / static_cast<double>(predictions.size());
}

std::pair<FittedModel, SelectionReport> select_model(const TimeSeries& series,
                                                     const SelectionOptions& options,
                                                     const std::string& kpi_id) {
    series.validate();
    const GridSeries grid = fill_gaps(series);
    const std::int64_t g = grid.series.granularity;

    // Trailing window.
    const std::size_t n_grid = grid.series.size();
    const auto window_points =
        static_cast<std::size_t>(std::max<std::int64_t>(1, options.max_train_window_s / g));
    const std::size_t n_window = std::min(n_grid, window_points);
    const std::size_t offset = n_grid - n_window;

    if (n_window < 50) {
        throw DataError("insufficient data: " + std::to_string(n_window) +
                        " grid points after windowing (need 50)");
    }

    const std::span<const std::int64_t> w_times{grid.series.timestamps.data() + offset, n_window};
    const std::span<const double> w_values{grid.series.values.data() + offset, n_window};

    // Combined mask: grid gaps plus zero-valued points, which belong to the
    // discrete regime and are unobserved for the continuous model.
    std::vector<std::uint8_t> w_mask(n_window, 0);
    for (std::size_t i = 0; i < n_window; ++i) {
        const bool missing = grid.missing[offset + i] != 0;
        w_mask[i] = (missing || is_zero_value(w_values[i])) ? 1 : 0;
    }

    const auto n_train =
        static_cast<std::size_t>(std::ceil(options.split_ratio * static_cast<double>(n_window)));
    const std::size_t n_val = n_window - n_train;

    const std::span<const double> train_values = w_values.subspan(0, n_train);
    const std::span<const std::uint8_t> train_mask{w_mask.data(), n_train};

    auto entries = enumerate_suite_entries(g, train_values, train_mask);
    if (!options.suite_filter.empty()) {
        std::vector<SuiteEntry> kept;
        for (auto& e : entries) {
            const std::string s = e.spec.str();
            if (std::find(options.suite_filter.begin(), options.suite_filter.end(), s) !=
                options.suite_filter.end()) {
                kept.push_back(std::move(e));
            }
        }
        entries = std::move(kept);
        if (entries.empty()) {
            throw SelectionError("suite filter matched no candidates");
        }
    }

    SelectionReport report;
    report.kpi_id = kpi_id;
    report.granularity = g;
    report.window_start = w_times.front();
    report.window_end = w_times.back();
    report.n_window = n_window;
    report.n_train = n_train;
    report.n_validation = n_val;
    report.candidates.resize(entries.size());

    parallel_for(entries.size(), options.jobs, [&](std::size_t i) {
        const SuiteEntry& entry = entries[i];
        CandidateResult& out = report.candidates[i];
        out.spec = entry.spec;
        if (!entry.applicable) {
            out.status = "inapplicable: " + entry.reason;
            return;
        }
        try {
            const ModelFamily family(entry.spec, g);
            out.n_params = family.n_params();
            const std::vector<double> transformed =
                transform_window(w_values, w_mask, entry.spec.transform);
            const std::span<const double> t_train{transformed.data(), n_train};

            const FitResult fit = fit_mle(family, t_train, train_mask, options.fit);
            const StateSpaceModel model = family.materialize(fit.theta, fit.train_variance);

            // One-step-ahead prediction through validation, warm-started
            // from the training posterior.
            auto [post, ll] = filter_posterior(model, t_train, train_mask);
            std::vector<double> preds;
            std::vector<double> actuals;
            preds.reserve(n_val);
            actuals.reserve(n_val);
            for (std::size_t j = n_train; j < n_window; ++j) {
                const auto [mean, var] = forecast_one(model, post);
                (void)var;
                const bool masked = w_mask[j] != 0;
                if (!masked) {
                    preds.push_back(invert_mean(mean, entry.spec.transform));
                    actuals.push_back(w_values[j]);
                }
                const double obs = transformed[j];
                post = advance_posterior(model, post, masked ? nullptr : &obs);
            }
            if (preds.empty()) {
                out.status = "failed: no usable validation points";
                return;
            }
            out.mse = validation_mse(preds, actuals);
            out.loglik = fit.loglik;
            out.status = "ok";
        } catch (const Error& e) {
            out.status = std::string("failed: ") + e.what();
        }
    });

    const int winner = pick_winner(report.candidates);
    if (winner < 0) {
        std::ostringstream msg;
        msg << "all candidates failed for KPI '" << kpi_id << "':";
        for (const auto& c : report.candidates) {
            msg << "\n  " << c.spec.str() << ": " << c.status;
        }
        throw SelectionError(msg.str());
    }
    report.winner_index = winner;

    // Refit the winner on train + validation combined.
    const StructuralSpec winner_spec = report.candidates[static_cast<std::size_t>(winner)].spec;
    const ModelFamily family(winner_spec, g);
    const std::vector<double> transformed =
        transform_window(w_values, w_mask, winner_spec.transform);
    const FitResult fit = fit_mle(family, transformed, w_mask, options.fit);
    report.winner_refit_loglik = fit.loglik;

    FittedModel fitted;
    fitted.kpi_id = kpi_id;
    fitted.spec = winner_spec;
    fitted.granularity = g;
    fitted.theta = fit.theta;
    fitted.train_variance = fit.train_variance;
    fitted.model = family.materialize(fit.theta, fit.train_variance);
    fitted.layout = family.layout();
    fitted.train_start = w_times.front();
    fitted.train_end = w_times.back();
    fitted.loglik = fit.loglik;
    for (std::size_t i = 0; i < n_window; ++i) {
        if (grid.missing[offset + i] != 0) continue;  // inserted points are not observations
        ++fitted.total_count;
        if (is_zero_value(w_values[i])) ++fitted.zero_count;
    }
    auto [post, ll] = filter_posterior(fitted.model, transformed, w_mask);
    (void)ll;
    fitted.posterior = std::move(post);
    return {std::move(fitted), std::move(report)};
}

std::string selection_report_to_json(const SelectionReport& r) {
    ordered_json j;
    j["schema_version"] = 1;
    j["kpi_id"] = r.kpi_id;
    j["granularity_s"] = r.granularity;
    j["window"] = {{"start", r.window_start},
                   {"end", r.window_end},
                   {"n_grid_points", r.n_window},
                   {"n_train", r.n_train},
                   {"n_validation", r.n_validation}};
    auto candidates = ordered_json::array();
    for (const auto& c : r.candidates) {
        ordered_json e;
        e["spec"] = c.spec.str();
        e["status"] = c.status;
        if (c.ok()) {
            e["validation_mse"] = c.mse;
            e["loglik"] = c.loglik;
        } else {
            e["validation_mse"] = nullptr;
            e["loglik"] = nullptr;
        }
        e["n_params"] = c.n_params;
        candidates.push_back(std::move(e));
    }
    j["candidates"] = std::move(candidates);
    if (r.winner_index >= 0) {
        const auto& w = r.candidates[static_cast<std::size_t>(r.winner_index)];
        j["winner"] = {{"index", r.winner_index},
                       {"spec", w.spec.str()},
                       {"validation_mse", w.mse},
                       {"refit_loglik", r.winner_refit_loglik}};
    } else {
        j["winner"] = nullptr;
    }
    return j.dump(2);
}

std::string fitted_model_to_json(const FittedModel& m) {
    const ModelFamily family(m.spec, m.granularity);
    const auto natural = family.natural(m.theta, m.train_variance);

    ordered_json j;
    j["schema_version"] = 1;
    j["kpi_id"] = m.kpi_id;
    j["spec"] = m.spec.str();
    j["granularity_s"] = m.granularity;
    j["param_vector"] = eigen_to_vec(m.theta);
    j["train_variance"] = m.train_variance;
    j["H"] = natural.H;
    j["Q_diag"] = natural.q_diag;
    j["Q_names"] = natural.q_names;
    j["ar_coef"] = natural.ar_coef;
    j["a1"] = eigen_to_vec(m.model.a1);
    j["P1_diag"] = eigen_to_vec(m.model.P1.diagonal());
    std::vector<int> flags(m.model.diffuse.begin(), m.model.diffuse.end());
    j["diffuse_flags"] = flags;

    ordered_json meta;
    meta["train_start"] = m.train_start;
    meta["train_end"] = m.train_end;
    meta["zero_count"] = m.zero_count;
    meta["total_count"] = m.total_count;
    meta["loglik"] = m.loglik;
    meta["filter_state_mean"] = eigen_to_vec(m.posterior.mean);
    auto cov = ordered_json::array();
    for (Eigen::Index r = 0; r < m.posterior.cov.rows(); ++r) {
        auto row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.posterior.cov.cols(); ++c) {
            row.push_back(m.posterior.cov(r, c));
        }
        cov.push_back(std::move(row));
    }
    meta["filter_state_cov"] = std::move(cov);
    j["train_meta"] = std::move(meta);
    return j.dump(2);
}

FittedModel fitted_model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad model JSON: ") + e.what());
    }
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != 1) {
            throw DataError("unsupported model schema version " + std::to_string(version));
        }
        FittedModel m;
        m.kpi_id = j.value("kpi_id", std::string{});
        m.spec = StructuralSpec::parse(j.at("spec").get<std::string>());
        m.granularity = j.at("granularity_s").get<std::int64_t>();
        m.theta = vec_to_eigen(j.at("param_vector").get<std::vector<double>>());
        m.train_variance = j.at("train_variance").get<double>();
        const ModelFamily family(m.spec, m.granularity);
        m.model = family.materialize(m.theta, m.train_variance);
        m.layout = family.layout();
        const auto& meta = j.at("train_meta");
        m.train_start = meta.at("train_start").get<std::int64_t>();
        m.train_end = meta.at("train_end").get<std::int64_t>();
        m.zero_count = meta.at("zero_count").get<std::size_t>();
        m.total_count = meta.at("total_count").get<std::size_t>();
        m.loglik = meta.at("loglik").get<double>();
        m.posterior.mean = vec_to_eigen(meta.at("filter_state_mean").get<std::vector<double>>());
        const auto& cov = meta.at("filter_state_cov");
        const auto rows = static_cast<Eigen::Index>(cov.size());
        m.posterior.cov.resize(rows, rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto row = cov.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
            if (static_cast<Eigen::Index>(row.size()) != rows) {
                throw DataError("filter_state_cov is not square");
            }
            for (Eigen::Index c = 0; c < rows; ++c) {
                m.posterior.cov(r, c) = row[static_cast<std::size_t>(c)];
            }
        }
        if (m.posterior.mean.size() != m.model.state_dim() ||
            m.posterior.cov.rows() != m.model.state_dim()) {
            throw DataError("filter state dimension mismatch");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad model JSON: ") + e.what());
    }
}

void save_fitted_model(const FittedModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path);
    }
    out << fitted_model_to_json(m) << "\n";
}

FittedModel load_fitted_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return fitted_model_from_json(buf.str());
}

}  // namespace stsad
