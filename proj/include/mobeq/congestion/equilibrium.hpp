#pragma once

#include <algorithm>

#include "mobeq/congestion/wardrop.hpp"
#include "mobeq/solvers/root_finding.hpp"
#include "mobeq/solvers/scalar_optimize.hpp"

// Provider best responses and the leader's price problem. A provider facing
// leader price p0 serves the uncapped level-matching demand
//   x(p) = inv_congestion((p0 - p)/V + base_time)
// and sizes its fleet to exactly that demand, so profit is
//   U(p) = (p - combined_cost) * x(p).
// U is strictly concave between the break-even price and the price at which
// demand dries up, so the optimum is the unique root of
//   g(p) = x(p) + (p - combined_cost) * x'(p).

namespace mobeq {

namespace congestion_detail {

struct BestResponseFrame {
    double level_target; // travel time the provider must undercut to serve
    double price_floor;  // combined cost: below this, serving loses money
    double price_ceiling; // demand vanishes here
    bool exits;
};

inline BestResponseFrame frame(const CongestionScenario& scenario, std::size_t j,
                               double leader_price) {
    const auto& m = scenario.msps.at(j);
    const double vot = scenario.value_of_time;
    const double d0 = delay(scenario.pt, leader_price, vot);
    const double t_free = m.congestion(0.0);
    BestResponseFrame f;
    f.price_floor = m.combined_cost();
    f.price_ceiling = d0 - vot * t_free;
    f.level_target = t_free;
    f.exits = f.price_floor + vot * t_free >= d0;
    return f;
}

} // namespace congestion_detail

// Profit-maximizing (price, fleet) of provider j against leader price p0,
// via root-finding on the first-order condition. Exits (0,0) when even a
// cost-covering price cannot attract demand.
inline MspStrategy best_response(const CongestionScenario& scenario, std::size_t j,
                                 double leader_price) {
    scenario.validate();
    if (leader_price < 0.0) throw std::invalid_argument("negative leader price");
    const auto& m = scenario.msps.at(j);
    const double vot = scenario.value_of_time;
    const auto fr = congestion_detail::frame(scenario, j, leader_price);
    if (fr.exits) return {0.0, 0.0};

    const double base = scenario.pt.base_time;
    auto demand = [&](double p) {
        return m.congestion.inverse_clamped((leader_price - p) / vot + base);
    };
    auto foc = [&](double p) {
        const double x = demand(p);
        const double slope = m.congestion.derivative(x);
        return x - (p - fr.price_floor) / (vot * slope);
    };
    auto root = find_root(foc, fr.price_floor, fr.price_ceiling, 1e-12);
    MspStrategy s;
    s.price = root.x;
    s.fleet = demand(root.x);
    return s;
}

// Same optimum in closed form for affine congestion alpha + beta*z:
//   p* = (p0 + V*(base - alpha) + cc)/2,   f* = (p0 + V*(base - alpha) - cc)/(2*V*beta)
// with cc the combined cost.
inline MspStrategy best_response_affine(const CongestionScenario& scenario, std::size_t j,
                                        double leader_price) {
    scenario.validate();
    if (leader_price < 0.0) throw std::invalid_argument("negative leader price");
    const auto& m = scenario.msps.at(j);
    if (m.congestion.kind() != CongestionFn::Kind::affine)
        throw std::invalid_argument("closed-form best response requires affine congestion");
    const auto fr = congestion_detail::frame(scenario, j, leader_price);
    if (fr.exits) return {0.0, 0.0};
    const double vot = scenario.value_of_time;
    const double alpha = m.congestion.affine_intercept();
    const double beta = m.congestion.affine_slope();
    const double gross = leader_price + vot * (scenario.pt.base_time - alpha);
    MspStrategy s;
    s.price = 0.5 * (gross + m.combined_cost());
    s.fleet = (gross - m.combined_cost()) / (2.0 * vot * beta);
    return s;
}

// Leader's optimal price when every provider has affine congestion, plays the
// closed-form best response, and stays active over the whole price range
// (combined cost plus free-flow time cost below the PT time cost). Projected
// onto [0, price_cap]. With no weight on revenue the objective is decreasing
// in the price, so the optimum is 0.
inline double leader_optimum_affine(const CongestionScenario& scenario) {
    scenario.validate();
    const double vot = scenario.value_of_time;
    const double base = scenario.pt.base_time;
    for (const auto& m : scenario.msps) {
        if (m.congestion.kind() != CongestionFn::Kind::affine)
            throw std::invalid_argument("leader closed form requires affine congestion");
        if (m.combined_cost() + vot * m.congestion.affine_intercept() >= vot * base)
            throw std::invalid_argument(
                "leader closed form requires every provider active at price 0");
    }
    if (!check_saturation_bound(scenario))
        throw std::invalid_argument("leader closed form requires the saturation bound");

    const double k1 = scenario.weights.customer_cost;
    const double k2 = scenario.weights.emission_cost;
    const double k3 = scenario.weights.public_revenue;
    if (k3 == 0.0) return 0.0;

    double s1 = 0.0; // sum of demand slopes d x_j / d p0
    double s2 = 0.0;
    for (const auto& m : scenario.msps) {
        const double alpha = m.congestion.affine_intercept();
        const double beta = m.congestion.affine_slope();
        const double denom = 2.0 * vot * beta;
        s1 += 1.0 / denom;
        s2 += ((k2 / k3) * m.emission_rate + vot * (base - alpha) - m.combined_cost()) / denom;
    }
    const double interior = (1.0 - k1 / k3 - s2) / (2.0 * s1);
    return std::clamp(interior, 0.0, scenario.pt.price_cap);
}

struct CongestionOutcome {
    MetricsTriple metrics;
    double welfare = 0.0;
    std::vector<double> profits; // one per provider
    WardropFlow flows;
};

// System metrics at given leader price and provider strategies: flows from
// the Wardrop solver, customer cost as total generalized cost paid, emission
// cost per served provider flow, revenue as PT fares collected.
inline CongestionOutcome social_welfare(const CongestionScenario& scenario, double leader_price,
                                        const std::vector<MspStrategy>& strategies) {
    CongestionOutcome out;
    out.flows = wardrop_solve(scenario, leader_price, strategies);
    const double vot = scenario.value_of_time;

    double customer = out.flows.pt_share() * delay(scenario.pt, leader_price, vot);
    double emission = 0.0;
    for (std::size_t j = 0; j < scenario.msps.size(); ++j) {
        const auto& m = scenario.msps[j];
        const auto& s = strategies[j];
        const double xj = out.flows.provider_share(j);
        if (xj > 0.0) customer += xj * (s.price + vot * m.congestion(xj));
        emission += m.emission_rate * xj;
        out.profits.push_back((s.price - m.trip_cost) * xj - m.fleet_cost * s.fleet);
    }
    out.metrics.customer_cost = customer;
    out.metrics.emission_cost = emission;
    out.metrics.public_revenue = leader_price * out.flows.pt_share();
    out.metrics.validate();
    out.welfare = scenario.weights.welfare(out.metrics);
    return out;
}

struct CongestionEquilibrium {
    double leader_price = 0.0;
    std::vector<MspStrategy> strategies;
    CongestionOutcome outcome;
};

struct StackelbergOptions {
    int leader_grid_points = 10000;
    double price_tolerance = 1e-10;
};

// Full bilevel solve: grid-plus-golden-section search of the leader price,
// each candidate evaluated at the providers' best responses (demands are
// separable, so the follower equilibrium is the tuple of best responses).
inline CongestionEquilibrium solve_stackelberg(const CongestionScenario& scenario,
                                               const StackelbergOptions& options = {}) {
    scenario.validate();
    if (!check_saturation_bound(scenario))
        throw std::invalid_argument(
            "leader search requires the saturation bound: providers could swallow all demand");

    auto respond = [&](double p0) {
        std::vector<MspStrategy> strategies;
        strategies.reserve(scenario.msps.size());
        for (std::size_t j = 0; j < scenario.msps.size(); ++j)
            strategies.push_back(best_response(scenario, j, p0));
        return strategies;
    };
    auto objective = [&](double p0) {
        return social_welfare(scenario, p0, respond(p0)).welfare;
    };
    auto best = maximize_1d(objective, 0.0, scenario.pt.price_cap, options.leader_grid_points,
                            options.price_tolerance);
    CongestionEquilibrium eq;
    eq.leader_price = best.x;
    eq.strategies = respond(best.x);
    eq.outcome = social_welfare(scenario, best.x, eq.strategies);
    return eq;
}

} // namespace mobeq
