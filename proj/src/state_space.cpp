// SPDX-License-Identifier: Apache-2.0
#include "stsad/state_space.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Sparse>

#include "stsad/errors.hpp"
#include "stsad/rng.hpp"

namespace stsad {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)

// Relative tolerance for detecting the Riccati fixed point. Once the
// predicted covariance stops moving, F and K are frozen and the per-step
// cost drops from O(m^3) to O(m^2).
constexpr double kSteadyTol = 1e-12;

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal();
}

struct FilterWork {
    Eigen::VectorXd a_pred, a_post, K;
    Eigen::MatrixXd P_pred, P_post, RQR, TP, prev_P_pred;
};

void symmetrize(Eigen::MatrixXd& P) {
    const auto m = P.rows();
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = 0.5 * (P(i, j) + P(j, i));
            P(i, j) = v;
            P(j, i) = v;
        }
    }
}

// Shared recursion behind kalman_filter / filter_loglik / filter_posterior.
// Structural transition matrices are block-sparse, so T enters through a
// sparse view.
double run_filter(const StateSpaceModel& model, std::span<const double> y,
                  std::span<const std::uint8_t> mask, FilterOutput* full, StatePosterior* post,
                  int* skipped_out) {
    const int m = model.state_dim();
    const std::size_t n = y.size();
    if (!mask.empty() && mask.size() != n) {
        throw DataError("mask length mismatch");
    }

    const Eigen::SparseMatrix<double> T_s = model.T.sparseView();

    FilterWork w;
    w.RQR.noalias() = model.R * model.Q * model.R.transpose();
    w.TP.resize(m, m);
    w.prev_P_pred.resize(m, m);

    if (full) {
        full->pred_mean.resize(n);
        full->pred_var.resize(n);
        full->filtered_state.resize(m, static_cast<Eigen::Index>(n));
        full->filtered_cov.assign(n, Eigen::MatrixXd());
    }

    const int n_diffuse = model.diffuse_count();
    int skipped = 0;
    double loglik = 0.0;

    bool steady = false;
    bool have_prev_pred = false;
    int steady_streak = 0;
    double F_ss = 0.0;
    Eigen::VectorXd K_ss;

    for (std::size_t t = 0; t < n; ++t) {
        const bool masked = !mask.empty() && mask[t] != 0;

        // Predict.
        if (t == 0) {
            w.a_pred = model.a1;
            w.P_pred = model.P1;
            have_prev_pred = false;
        } else if (steady) {
            w.a_pred.noalias() = T_s * w.a_post;
            w.a_pred += model.c;
            // P_pred stays at the frozen fixed point.
        } else {
            w.a_pred.noalias() = T_s * w.a_post;
            w.a_pred += model.c;
            w.TP.noalias() = T_s * w.P_post;
            w.prev_P_pred.swap(w.P_pred);
            // T P T' = T (T P)', since P_post is symmetric.
            w.P_pred.noalias() = T_s * w.TP.transpose();
            w.P_pred += w.RQR;
            symmetrize(w.P_pred);
        }

        double F;
        if (steady) {
            F = F_ss;
        } else {
            F = (model.Z * w.P_pred * model.Z.transpose())(0, 0) + model.H;
        }
        const double mu = model.Z.dot(w.a_pred) + model.d;

        if (full) {
            full->pred_mean[t] = mu;
            full->pred_var[t] = F;
        }

        // Update.
        if (masked) {
            // A prediction-only step perturbs the covariance away from the
            // fixed point and breaks the convergence comparison chain.
            steady = false;
            steady_streak = 0;
            have_prev_pred = false;
            w.a_post = w.a_pred;
            w.P_post = w.P_pred;
        } else {
            if (!(F > 0.0) || !std::isfinite(F)) {
                throw FilterError("non-positive predictive variance at step " +
                                  std::to_string(t));
            }
            const double v = y[t] - mu;
            if (steady) {
                w.a_post = w.a_pred + K_ss * v;
            } else {
                w.K.noalias() = w.P_pred * model.Z.transpose() / F;
                w.a_post = w.a_pred + w.K * v;
                w.P_post = w.P_pred;
                w.P_post.noalias() -= w.K * (w.K.transpose() * F);
                symmetrize(w.P_post);
            }
            if (skipped < n_diffuse) {
                ++skipped;
            } else {
                loglik += -0.5 * (kLog2Pi + std::log(F) + v * v / F);
            }

            // Steady-state detection over consecutive updated steps.
            if (!steady && t > 0 && have_prev_pred) {
                const double scale = 1.0 + w.P_pred.cwiseAbs().maxCoeff();
                const double delta = (w.P_pred - w.prev_P_pred).cwiseAbs().maxCoeff();
                if (delta <= kSteadyTol * scale) {
                    if (++steady_streak >= 2) {
                        steady = true;
                        F_ss = F;
                        K_ss = w.K;
                    }
                } else {
                    steady_streak = 0;
                }
            }
            have_prev_pred = true;
        }

        if (full) {
            full->filtered_state.col(static_cast<Eigen::Index>(t)) = w.a_post;
            full->filtered_cov[t] = w.P_post;
        }
    }

    if (post) {
        post->mean = w.a_post;
        post->cov = w.P_post;
    }
    if (skipped_out) {
        *skipped_out = skipped;
    }
    return loglik;
}

}  // namespace

int StateSpaceModel::diffuse_count() const {
    int n = 0;
    for (const auto f : diffuse) n += f != 0;
    return n;
}

void StateSpaceModel::validate() const {
    const auto m = T.rows();
    const auto r = Q.rows();
    if (T.cols() != m || Z.cols() != m || R.rows() != m || R.cols() != r || Q.cols() != r ||
        c.size() != m || a1.size() != m || P1.rows() != m || P1.cols() != m ||
        static_cast<Eigen::Index>(diffuse.size()) != m) {
        throw DataError("state-space model dimensions inconsistent");
    }
    if (!(H >= 0.0)) {
        throw DataError("observation variance H must be nonnegative");
    }
    const double q_scale = 1.0 + Q.cwiseAbs().maxCoeff();
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-9 * q_scale) {
        throw DataError("Q not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    if (es.eigenvalues().minCoeff() < -1e-8 * q_scale) {
        throw DataError("Q not positive semidefinite");
    }
    const double p_scale = 1.0 + P1.cwiseAbs().maxCoeff();
    if ((P1 - P1.transpose()).cwiseAbs().maxCoeff() > 1e-9 * p_scale) {
        throw DataError("P1 not symmetric");
    }
}

FilterOutput kalman_filter(const StateSpaceModel& model, std::span<const double> y,
                           std::span<const std::uint8_t> mask) {
    FilterOutput out;
    out.loglik = run_filter(model, y, mask, &out, nullptr, &out.loglik_skipped);
    return out;
}

double filter_loglik(const StateSpaceModel& model, std::span<const double> y,
                     std::span<const std::uint8_t> mask) {
    return run_filter(model, y, mask, nullptr, nullptr, nullptr);
}

std::pair<StatePosterior, double> filter_posterior(const StateSpaceModel& model,
                                                   std::span<const double> y,
                                                   std::span<const std::uint8_t> mask) {
    StatePosterior post;
    const double ll = run_filter(model, y, mask, nullptr, &post, nullptr);
    return {std::move(post), ll};
}

std::pair<double, double> forecast_one(const StateSpaceModel& model,
                                       const StatePosterior& posterior) {
    Eigen::VectorXd a = model.T * posterior.mean + model.c;
    Eigen::MatrixXd P = model.T * posterior.cov * model.T.transpose() +
                        model.R * model.Q * model.R.transpose();
    const double mean = model.Z.dot(a) + model.d;
    const double var = (model.Z * P * model.Z.transpose())(0, 0) + model.H;
    return {mean, var};
}

StatePosterior advance_posterior(const StateSpaceModel& model, const StatePosterior& posterior,
                                 const double* observed) {
    StatePosterior next;
    next.mean = model.T * posterior.mean + model.c;
    next.cov = model.T * posterior.cov * model.T.transpose() +
               model.R * model.Q * model.R.transpose();
    next.cov = 0.5 * (next.cov + next.cov.transpose()).eval();
    if (observed) {
        const double F = (model.Z * next.cov * model.Z.transpose())(0, 0) + model.H;
        if (!(F > 0.0) || !std::isfinite(F)) {
            throw FilterError("non-positive predictive variance in state update");
        }
        const double v = *observed - model.Z.dot(next.mean) - model.d;
        const Eigen::VectorXd K = next.cov * model.Z.transpose() / F;
        next.mean += K * v;
        next.cov -= K * K.transpose() * F;
        next.cov = 0.5 * (next.cov + next.cov.transpose()).eval();
    }
    return next;
}

Simulation simulate(const StateSpaceModel& model, std::size_t n, std::uint64_t seed) {
    model.validate();
    const int m = model.state_dim();
    const int r = model.noise_dim();
    Rng rng(seed);

    const Eigen::MatrixXd Lq = psd_sqrt(model.Q);
    const Eigen::MatrixXd Lp = psd_sqrt(model.P1);

    Simulation sim;
    sim.y.resize(n);
    sim.states.resize(m, static_cast<Eigen::Index>(n));

    Eigen::VectorXd z(m);
    for (int i = 0; i < m; ++i) z(i) = rng.normal();
    Eigen::VectorXd alpha = model.a1 + Lp * z;

    Eigen::VectorXd eta(r);
    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) {
            for (int i = 0; i < r; ++i) eta(i) = rng.normal();
            alpha = model.T * alpha + model.c + model.R * (Lq * eta);
        }
        sim.states.col(static_cast<Eigen::Index>(t)) = alpha;
        sim.y[t] = model.Z.dot(alpha) + model.d + std::sqrt(model.H) * rng.normal();
    }
    return sim;
}

}  // namespace stsad
