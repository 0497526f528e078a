#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mobeq {

// Minimizes sum_j integral_0^{x_j} c_j(t) dt over the capped simplex
// { x >= 0, x_j <= cap_j, sum_j x_j = total } for strictly increasing
// marginal costs c_j. Water-filling on the common marginal-cost level mu:
// x_j(mu) = largest flow on arc j whose marginal cost stays <= mu, found by
// monotone bisection; an outer bisection matches sum_j x_j(mu) = total. The
// optimality condition this enforces is the usual one: arcs with slack share
// one level, arcs at cap may sit below it, unused arcs start above it.
//
// Flat segments make x_j(mu) jump; the residual between the lower and upper
// level is distributed in arc-index order, which keeps results deterministic.
inline std::vector<double> minimize_capped_simplex_potential(
    const std::vector<std::function<double(double)>>& marginal_cost,
    const std::vector<double>& caps, double total, int outer_iterations = 100,
    int inner_iterations = 64) {
    const std::size_t n = marginal_cost.size();
    if (n == 0) throw std::invalid_argument("no arcs");
    if (caps.size() != n) throw std::invalid_argument("caps size mismatch");
    if (!(total > 0.0)) throw std::invalid_argument("total flow must be positive");

    std::vector<double> cap_eff(n);
    double cap_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (std::isnan(caps[j]) || caps[j] < 0.0)
            throw std::invalid_argument("arc capacity must be non-negative");
        cap_eff[j] = std::min(caps[j], total);
        cap_sum += cap_eff[j];
    }
    if (cap_sum < total * (1.0 - 1e-12))
        throw std::invalid_argument("infeasible: capacities sum below required total");

    // Largest x in [0, cap] with c(x) <= mu.
    auto flow_at_level = [&](std::size_t j, double mu) {
        if (cap_eff[j] == 0.0) return 0.0;
        if (marginal_cost[j](0.0) > mu) return 0.0;
        if (marginal_cost[j](cap_eff[j]) <= mu) return cap_eff[j];
        double lo = 0.0, hi = cap_eff[j];
        for (int it = 0; it < inner_iterations; ++it) {
            const double mid = 0.5 * (lo + hi);
            (marginal_cost[j](mid) <= mu ? lo : hi) = mid;
        }
        return lo;
    };
    auto level_sum = [&](double mu) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += flow_at_level(j, mu);
        return s;
    };

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        if (cap_eff[j] == 0.0) continue;
        const double c0 = marginal_cost[j](0.0);
        const double c1 = marginal_cost[j](cap_eff[j]);
        if (!(std::isfinite(c0) && std::isfinite(c1) && c1 >= c0))
            throw std::invalid_argument("marginal cost must be finite and non-decreasing");
        lo = std::min(lo, c0);
        hi = std::max(hi, c1);
    }
    // Keep the invariant sum(lo) < total <= sum(hi).
    if (level_sum(lo) >= total) {
        hi = lo;
        lo = lo - std::max(1.0, std::abs(lo)); // below every c_j(0): sum is 0
    }
    for (int it = 0; it < outer_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        (level_sum(mid) < total ? lo : hi) = mid;
    }

    // Assemble between the two bracketing levels, topping up in index order.
    std::vector<double> x(n);
    double assigned = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = flow_at_level(j, lo);
        assigned += x[j];
    }
    double deficit = total - assigned;
    for (std::size_t j = 0; j < n && deficit > 0.0; ++j) {
        const double room = flow_at_level(j, hi) - x[j];
        const double add = std::min(room, deficit);
        if (add > 0.0) {
            x[j] += add;
            deficit -= add;
        }
    }
    // Mop up float dust on the first arc with slack.
    if (deficit != 0.0)
        for (std::size_t j = 0; j < n && deficit != 0.0; ++j) {
            const double add = std::min(cap_eff[j] - x[j], deficit);
            if (add > 0.0) {
                x[j] += add;
                deficit -= add;
            }
        }
    return x;
}

} // namespace mobeq
