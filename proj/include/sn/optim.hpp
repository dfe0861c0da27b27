#ifndef SN_OPTIM_HPP
#define SN_OPTIM_HPP

// Small dense BFGS maximizer with backtracking line search, used by the
// likelihood fitters.  Maximizes f; the callback returns the value and
// fills the gradient.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "sn/types.hpp"

namespace sn {
namespace detail {

struct OptimResult {
    Vecd x;
    double value = 0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> trace;  // accepted objective values
};

// objective(x, grad) -> f(x), grad sized like x
inline OptimResult bfgs_maximize(const std::function<double(const Vecd&, Vecd&)>& objective,
                                 Vecd x0, int max_iter = 500, double grad_tol = 1e-8) {
    const Eigen::Index n = x0.size();
    OptimResult res;
    Matd Hinv = Matd::Identity(n, n);
    Vecd x = std::move(x0), g(n), g_new(n);
    double f = objective(x, g);
    res.trace.push_back(f);
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it;
        if (!std::isfinite(f)) break;
        if (g.lpNorm<Eigen::Infinity>() <= grad_tol * (1.0 + std::abs(f))) {
            res.converged = true;
            break;
        }
        Vecd dir = Hinv * g;
        if (dir.dot(g) <= 0) {  // not an ascent direction; reset
            Hinv.setIdentity();
            dir = g;
        }
        double step = 1.0;
        const double slope = dir.dot(g);
        double f_new = -std::numeric_limits<double>::infinity();
        Vecd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + step * dir;
            f_new = objective(x_new, g_new);
            if (std::isfinite(f_new) && f_new >= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const Vecd s = x_new - x;
        const Vecd yv = g - g_new;  // gradient of -f increases along ascent
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            const Vecd Hy = Hinv * yv;
            const double yHy = yv.dot(Hy);
            Hinv += ((sy + yHy) / (sy * sy)) * (s * s.transpose()) -
                    (Hy * s.transpose() + s * Hy.transpose()) / sy;
        }
        x = x_new;
        g = g_new;
        f = f_new;
        res.trace.push_back(f);
    }
    res.x = x;
    res.value = f;
    return res;
}

// Central-difference Hessian of f from its gradient.
inline Matd fd_hessian(const std::function<void(const Vecd&, Vecd&)>& gradient, const Vecd& x,
                       double rel_step = 1e-5) {
    const Eigen::Index n = x.size();
    Matd H(n, n);
    Vecd gp(n), gm(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = rel_step * (1.0 + std::abs(x(i)));
        Vecd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        gradient(xp, gp);
        gradient(xm, gm);
        H.col(i) = (gp - gm) / (2.0 * h);
    }
    return ((H + H.transpose()) / 2.0).eval();
}

}  // namespace detail
}  // namespace sn

#endif
