#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace mixbo {

struct LbfgsOptions {
    int max_iterations = 200;
    int memory = 8;
    double gradient_tolerance = 1e-6;  // on the projected gradient, infinity norm
    double relative_tolerance = 1e-10;  // on successive objective values
    double armijo = 1e-4;
    int max_backtracks = 40;
};

struct OptimizeResult {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int evaluations = 0;
    std::vector<double> trace;  // accepted objective values, one per iteration
};

// Box-constrained limited-memory quasi-Newton with projection onto the box.
// `fg(x, grad)` returns f(x) and fills grad; a non-finite return marks an
// infeasible point and is handled by backtracking.
template <typename Objective>
OptimizeResult minimize_box(Objective&& fg, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper, const LbfgsOptions& opts = {}) {
    const Eigen::Index n = x0.size();
    auto project = [&](Eigen::VectorXd v) { return v.cwiseMax(lower).cwiseMin(upper).eval(); };

    OptimizeResult res;
    Eigen::VectorXd x = project(std::move(x0));
    Eigen::VectorXd g(n);
    double f = fg(x, g);
    ++res.evaluations;
    res.x = x;
    res.value = f;
    if (!std::isfinite(f)) return res;
    res.trace.push_back(f);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        // Variables pinned at a bound with the gradient pointing outward.
        Eigen::Array<bool, Eigen::Dynamic, 1> free(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            bool at_lo = x[i] <= lower[i] && g[i] > 0.0;
            bool at_hi = x[i] >= upper[i] && g[i] < 0.0;
            free[i] = !(at_lo || at_hi);
        }
        const double pg = (project(x - g) - x).cwiseAbs().maxCoeff();
        if (pg < opts.gradient_tolerance) break;

        Eigen::VectorXd q = free.select(g, 0.0);
        const std::size_t m = s_hist.size();
        std::vector<double> alpha(m);
        for (std::size_t k = m; k-- > 0;) {
            alpha[k] = rho_hist[k] * s_hist[k].dot(q);
            q -= alpha[k] * y_hist[k];
        }
        if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        for (std::size_t k = 0; k < m; ++k) {
            double beta = rho_hist[k] * y_hist[k].dot(q);
            q += (alpha[k] - beta) * s_hist[k];
        }
        Eigen::VectorXd d = free.select(-q, 0.0);
        if (!(d.dot(g) < 0.0)) {
            d = free.select(-g, 0.0);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        double step = 1.0;
        if (s_hist.empty()) step = std::min(1.0, 1.0 / std::max(d.lpNorm<Eigen::Infinity>(), 1e-12));

        Eigen::VectorXd x_new, g_new(n);
        double f_new = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            x_new = project(x + step * d);
            f_new = fg(x_new, g_new);
            ++res.evaluations;
            if (std::isfinite(f_new) && f_new <= f + opts.armijo * g.dot(x_new - x)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.squaredNorm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        const double decrease = f - f_new;
        x = std::move(x_new);
        g = g_new;
        f = f_new;
        res.iterations = iter + 1;
        res.trace.push_back(f);
        if (decrease <= opts.relative_tolerance * std::max({std::abs(f), 1.0})) break;
    }
    res.x = x;
    res.value = f;
    return res;
}

}  // namespace mixbo
