// odtmotion: rigid-motion estimation for optical diffraction tomography
// Derivative-free simplex minimization (Nelder-Mead) with the standard
// coefficient set: reflection 1, expansion 2, contraction 1/2, shrink 1/2.
#pragma once

#include <odt/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace odt {

namespace detail {

/// Golden-section minimization of a unimodal scalar function on [lo, hi].
template <typename F>
double golden_minimize(F &&f, double lo, double hi, double tol = 1e-10,
                       int max_iter = 200) {
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < max_iter && b - a > tol; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

} // namespace detail

struct NelderMeadOptions {
    double initial_step = 0.05; ///< per-coordinate offset of the start simplex
    double diameter_tol = 1e-8; ///< stop when the simplex shrinks below this
    int max_iter = 200;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
};

/// Minimize an n-dimensional objective by the downhill simplex method.
///
/// The start simplex is x0 plus one vertex per coordinate offset by
/// initial_step.  Iteration stops when the simplex diameter (max distance of
/// any vertex from the best, infinity norm) falls below diameter_tol or after
/// max_iter steps; the best vertex is returned.  A non-finite objective value
/// at any probe aborts with OptimizationError carrying the best point seen.
template <typename F>
NelderMeadResult nelder_mead(F &&objective, const std::vector<double> &x0,
                             const NelderMeadOptions &opts = {}) {
    const std::size_t n = x0.size();
    if (n == 0) {
        throw ConfigError("nelder_mead: empty start point");
    }

    std::vector<std::vector<double>> xs(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i + 1][i] += opts.initial_step;
    }

    std::vector<double> best_x = x0;
    double best_f = std::numeric_limits<double>::infinity();
    const auto eval = [&](const std::vector<double> &x) {
        const double f = objective(x);
        if (!std::isfinite(f)) {
            throw OptimizationError("nelder_mead: objective became non-finite",
                                    best_x, best_f);
        }
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
        return f;
    };

    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        fs[i] = eval(xs[i]);
    }

    std::vector<std::size_t> order(n + 1);
    const auto sort_simplex = [&] {
        for (std::size_t i = 0; i <= n; ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return fs[a] < fs[b];
                         });
    };
    const auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t c = 0; c < n; ++c) {
                d = std::max(d, std::abs(xs[i][c] - xs[order[0]][c]));
            }
        }
        return d;
    };

    int it = 0;
    for (; it < opts.max_iter; ++it) {
        sort_simplex();
        if (diameter() < opts.diameter_tol) {
            break;
        }
        const std::size_t lo = order[0], hi = order[n], next_hi = order[n - 1];

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == hi) {
                continue;
            }
            for (std::size_t c = 0; c < n; ++c) {
                centroid[c] += xs[i][c];
            }
        }
        for (double &c : centroid) {
            c /= static_cast<double>(n);
        }
        const auto blend = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t c = 0; c < n; ++c) {
                x[c] = centroid[c] + t * (centroid[c] - xs[hi][c]);
            }
            return x;
        };

        const std::vector<double> xr = blend(1.0); // reflection
        const double fr = eval(xr);
        if (fr < fs[lo]) {
            const std::vector<double> xe = blend(2.0); // expansion
            const double fe = eval(xe);
            if (fe < fr) {
                xs[hi] = xe;
                fs[hi] = fe;
            } else {
                xs[hi] = xr;
                fs[hi] = fr;
            }
            continue;
        }
        if (fr < fs[next_hi]) {
            xs[hi] = xr;
            fs[hi] = fr;
            continue;
        }
        if (fr < fs[hi]) {
            const std::vector<double> xc = blend(0.5); // outside contraction
            const double fc = eval(xc);
            if (fc <= fr) {
                xs[hi] = xc;
                fs[hi] = fc;
                continue;
            }
        } else {
            const std::vector<double> xc = blend(-0.5); // inside contraction
            const double fc = eval(xc);
            if (fc < fs[hi]) {
                xs[hi] = xc;
                fs[hi] = fc;
                continue;
            }
        }
        // Shrink toward the best vertex.
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == lo) {
                continue;
            }
            for (std::size_t c = 0; c < n; ++c) {
                xs[i][c] = xs[lo][c] + 0.5 * (xs[i][c] - xs[lo][c]);
            }
            fs[i] = eval(xs[i]);
        }
    }

    sort_simplex();
    return {xs[order[0]], fs[order[0]], it};
}

} // namespace odt
