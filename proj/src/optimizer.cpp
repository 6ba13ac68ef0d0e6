// SPDX-License-Identifier: Apache-2.0
#include "stsad/optimizer.hpp"

#include <cmath>
#include <limits>

namespace stsad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double guarded_eval(const std::function<double(const Eigen::VectorXd&)>& f,
                    const Eigen::VectorXd& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
}

Eigen::VectorXd forward_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double fx, double step) {
    const auto n = x.size();
    Eigen::VectorXd g(n);
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = step * (1.0 + std::abs(x(i)));
        xp(i) = x(i) + h;
        double fp = guarded_eval(f, xp);
        if (!std::isfinite(fp)) {
            // Probe the other side when the forward point is out of range.
            xp(i) = x(i) - h;
            fp = guarded_eval(f, xp);
            g(i) = std::isfinite(fp) ? (fx - fp) / h : 0.0;
        } else {
            g(i) = (fp - fx) / h;
        }
        xp(i) = x(i);
    }
    return g;
}

}  // namespace

BfgsResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& objective,
                         Eigen::VectorXd x0, const BfgsOptions& options) {
    const auto n = x0.size();
    BfgsResult result;
    result.x = std::move(x0);
    result.f = guarded_eval(objective, result.x);
    if (n == 0 || !std::isfinite(result.f)) {
        return result;
    }

    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g = forward_gradient(objective, result.x, result.f, options.fd_step);

    for (int iter = 0; iter < options.max_iter; ++iter) {
        result.iterations = iter + 1;

        Eigen::VectorXd p = -(Hinv * g);
        if (p.dot(g) >= 0.0) {
            // Not a descent direction; restart from steepest descent.
            Hinv.setIdentity();
            p = -g;
        }

        // Armijo backtracking.
        double step = 1.0;
        const double slope = g.dot(p);
        double f_new = kInf;
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            x_new = result.x + step * p;
            f_new = guarded_eval(objective, x_new);
            if (f_new <= result.f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            result.converged = true;  // no progress possible at this scale
            break;
        }

        Eigen::VectorXd g_new = forward_gradient(objective, x_new, f_new, options.fd_step);
        const Eigen::VectorXd s = x_new - result.x;
        const Eigen::VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-10 * s.norm() * yv.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            Hinv = (I - rho * s * yv.transpose()) * Hinv * (I - rho * yv * s.transpose()) +
                   rho * s * s.transpose();
        }

        const double improvement = result.f - f_new;
        result.x = std::move(x_new);
        result.f = f_new;
        g = std::move(g_new);

        if (improvement <= options.rel_tol * (1.0 + std::abs(result.f)) && iter > 0) {
            result.converged = true;
            break;
        }
    }
    return result;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& objective,
                            const Eigen::VectorXd& x, double step) {
    const auto n = x.size();
    Eigen::VectorXd g(n);
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = step * (1.0 + std::abs(x(i)));
        xp(i) = x(i) + h;
        const double fp = objective(xp);
        xp(i) = x(i) - h;
        const double fm = objective(xp);
        xp(i) = x(i);
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace stsad
