#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace mobeq {

struct RootProblem {
    std::function<double(double)> f;
    double lo = 0.0;
    double hi = 1.0;
    double tolerance = 1e-12;   // on |f(x)|
    int max_iterations = 200;
};

struct RootResult {
    double x = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

// Root of a continuous function on a sign-changing bracket. Secant steps when
// the local data is finite and well-behaved, plain bisection otherwise, so the
// bracket always shrinks and infinite endpoint values (steep barriers) are
// harmless. Converges to |f| <= tolerance or to a machine-width bracket.
inline RootResult find_root(const RootProblem& problem) {
    if (!(problem.lo <= problem.hi)) throw std::invalid_argument("invalid root bracket");
    double a = problem.lo, b = problem.hi;
    double fa = problem.f(a), fb = problem.f(b);
    if (std::isnan(fa) || std::isnan(fb))
        throw std::invalid_argument("bracket endpoint evaluates to NaN");
    if (fa == 0.0) return {a, 0.0, 0};
    if (fb == 0.0) return {b, 0.0, 0};
    if ((fa > 0) == (fb > 0))
        throw std::invalid_argument("no sign change over the root bracket");

    double best_x = std::abs(fa) < std::abs(fb) ? a : b;
    double best_f = std::abs(fa) < std::abs(fb) ? fa : fb;
    if (!std::isfinite(best_f)) {
        best_x = std::isfinite(fa) ? a : b;
        best_f = std::isfinite(fa) ? fa : fb;
    }

    int it = 0;
    for (; it < problem.max_iterations; ++it) {
        if (std::isfinite(best_f) && std::abs(best_f) <= problem.tolerance) break;
        const double width = b - a;
        if (width <= 1e-15 * std::max(1.0, std::max(std::abs(a), std::abs(b)))) break;

        double x = a + 0.5 * width; // bisection default
        if (std::isfinite(fa) && std::isfinite(fb) && fb != fa) {
            const double secant = (a * fb - b * fa) / (fb - fa);
            const double margin = 0.01 * width;
            if (secant > a + margin && secant < b - margin) x = secant;
        }
        const double fx = problem.f(x);
        if (std::isnan(fx)) throw std::invalid_argument("function evaluates to NaN inside bracket");
        if (fx == 0.0) return {x, 0.0, it + 1};
        if (std::isfinite(fx) && (!std::isfinite(best_f) || std::abs(fx) < std::abs(best_f))) {
            best_x = x;
            best_f = fx;
        }
        if ((fx > 0) == (fa > 0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    return {best_x, best_f, it};
}

inline RootResult find_root(const std::function<double(double)>& f, double lo, double hi,
                            double tolerance = 1e-12) {
    RootProblem p;
    p.f = f;
    p.lo = lo;
    p.hi = hi;
    p.tolerance = tolerance;
    return find_root(p);
}

} // namespace mobeq
