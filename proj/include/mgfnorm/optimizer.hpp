#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "mgfnorm/common.hpp"

namespace mgfnorm {

struct MinimizeOptions {
    int max_iterations = 400;
    double grad_tol = 1e-6;       ///< sup-norm of the finite-difference gradient
    double f_tol = 1e-11;         ///< relative objective decrease, two hits in a row
    double fd_step = 1e-6;        ///< central-difference step (scaled by max(1,|x|))
    int max_line_search = 50;
};

struct MinimizeResult {
    Vector x;
    double f = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
    double grad_norm = std::numeric_limits<double>::quiet_NaN();
};

/**
 * @brief BFGS minimizer over an unconstrained vector, derivative-free at the
 *        interface (central-difference gradients).
 *
 * The objective may return +inf / NaN to mark infeasible points; the
 * backtracking Armijo search treats those as failed steps. Intended for the
 * smooth reparameterized likelihoods in this library (a dozen or two
 * variables), not as a general large-scale solver.
 */
inline MinimizeResult minimize_bfgs(const std::function<double(const Vector&)>& f,
                                    const Vector& x0,
                                    const MinimizeOptions& opts = {}) {
    const Index v = x0.size();
    MinimizeResult res;
    res.x = x0;
    res.f = f(x0);
    if (!std::isfinite(res.f)) return res;  // caller decides what non-finite start means

    auto gradient = [&](const Vector& x, Vector& g) {
        Vector probe = x;
        for (Index i = 0; i < v; ++i) {
            const double h = opts.fd_step * std::max(1.0, std::abs(x(i)));
            probe(i) = x(i) + h;
            const double fp = f(probe);
            probe(i) = x(i) - h;
            const double fm = f(probe);
            probe(i) = x(i);
            g(i) = (std::isfinite(fp) && std::isfinite(fm))
                       ? (fp - fm) / (2.0 * h)
                       : std::numeric_limits<double>::quiet_NaN();
        }
        return g.allFinite();
    };

    Matrix h_inv = Matrix::Identity(v, v);
    Vector g(v), g_new(v);
    if (!gradient(res.x, g)) return res;

    int flat_hits = 0;
    for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
        res.grad_norm = g.cwiseAbs().maxCoeff();
        if (res.grad_norm < opts.grad_tol) {
            res.converged = true;
            return res;
        }

        Vector direction = -(h_inv * g);
        double slope = g.dot(direction);
        if (!(slope < 0.0)) {  // lost curvature; restart from steepest descent
            h_inv.setIdentity();
            direction = -g;
            slope = g.dot(direction);
        }

        double step = 1.0;
        double f_new = std::numeric_limits<double>::infinity();
        Vector x_new;
        bool accepted = false;
        for (int ls = 0; ls < opts.max_line_search; ++ls) {
            x_new = res.x + step * direction;
            f_new = f(x_new);
            if (std::isfinite(f_new) && f_new <= res.f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) return res;  // stuck; not converged

        const Vector s = x_new - res.x;
        const double f_drop = res.f - f_new;
        res.x = std::move(x_new);
        res.f = f_new;
        if (!gradient(res.x, g_new)) return res;

        const Vector yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-10 * s.norm() * yv.norm()) {
            const double rho = 1.0 / sy;
            const Matrix outer = Matrix::Identity(v, v) - rho * s * yv.transpose();
            h_inv = outer * h_inv * outer.transpose() + rho * s * s.transpose();
        }
        g = g_new;

        if (f_drop <= opts.f_tol * (1.0 + std::abs(res.f))) {
            if (++flat_hits >= 2) {
                res.grad_norm = g.cwiseAbs().maxCoeff();
                res.converged = true;
                return res;
            }
        } else {
            flat_hits = 0;
        }
    }
    res.grad_norm = g.cwiseAbs().maxCoeff();
    return res;
}

}  // namespace mgfnorm
