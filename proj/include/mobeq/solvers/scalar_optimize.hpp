#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace mobeq {

struct Maximize1dResult {
    double x = 0.0;
    double value = 0.0;
    int evaluations = 0;
};

// Global-ish scalar maximization on [lo, hi]: dense grid scan to locate the
// best cell, then golden-section refinement inside the two neighbouring
// cells. Only strict improvements move the incumbent, so plateaus resolve to
// the leftmost grid point (a constant function returns lo).
inline Maximize1dResult maximize_1d(const std::function<double(double)>& f, double lo,
                                    double hi, int grid_points = 10000,
                                    double x_tolerance = 1e-10) {
    if (!(lo <= hi)) throw std::invalid_argument("invalid maximization interval");
    if (grid_points < 2) throw std::invalid_argument("need at least two grid points");
    if (lo == hi) return {lo, f(lo), 1};

    int evals = 0;
    auto eval = [&](double x) {
        ++evals;
        const double v = f(x);
        if (std::isnan(v)) throw std::invalid_argument("objective evaluates to NaN");
        return v;
    };

    const double step = (hi - lo) / (grid_points - 1);
    double best_x = lo, best_v = eval(lo);
    int best_i = 0;
    for (int i = 1; i < grid_points; ++i) {
        const double x = (i == grid_points - 1) ? hi : lo + i * step;
        const double v = eval(x);
        if (v > best_v) {
            best_v = v;
            best_x = x;
            best_i = i;
        }
    }

    // Refine inside the bracketing cells.
    double a = (best_i == 0) ? lo : lo + (best_i - 1) * step;
    double b = (best_i == grid_points - 1) ? hi : lo + (best_i + 1) * step;
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    while (b - a > x_tolerance) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2);
        }
        const double cand_x = f1 > f2 ? x1 : x2;
        const double cand_v = f1 > f2 ? f1 : f2;
        if (cand_v > best_v) {
            best_v = cand_v;
            best_x = cand_x;
        }
    }
    return {best_x, best_v, evals};
}

} // namespace mobeq
