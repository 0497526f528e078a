#pragma once

#include <limits>

#include "mobeq/congestion/model.hpp"
#include "mobeq/solvers/capped_simplex.hpp"

namespace mobeq {

// Wardrop split of the unit demand over [pt, providers...] given posted
// prices and fleet caps. The equilibrium is the minimizer of the Beckmann
// potential sum_j integral of delay_j, a convex program over the capped
// simplex; the uncapped public-transport arc keeps it feasible.
inline WardropFlow wardrop_solve(const CongestionScenario& scenario, double leader_price,
                                 const std::vector<MspStrategy>& strategies) {
    scenario.validate();
    if (strategies.size() != scenario.msps.size())
        throw std::invalid_argument("one strategy per provider required");
    if (leader_price < 0.0) throw std::invalid_argument("negative leader price");
    for (const auto& s : strategies) s.validate();

    const double vot = scenario.value_of_time;
    std::vector<std::function<double(double)>> marginal;
    std::vector<double> caps;
    marginal.push_back([d0 = delay(scenario.pt, leader_price, vot)](double) { return d0; });
    caps.push_back(std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < scenario.msps.size(); ++j) {
        const auto& fn = scenario.msps[j].congestion;
        const double price = strategies[j].price;
        marginal.push_back([&fn, price, vot](double z) { return price + vot * fn(z); });
        caps.push_back(strategies[j].fleet);
    }
    WardropFlow flow{minimize_capped_simplex_potential(marginal, caps, 1.0)};
    flow.validate();
    return flow;
}

// Closed-form uncapped split: every provider arc absorbs exactly the flow
// that levels its delay with public transport, the remainder rides PT. Only
// valid while the providers' joint uncapped demand stays within the unit
// total, which the saturation bound guarantees for any in-range price vector.
inline WardropFlow wardrop_closed_form(const CongestionScenario& scenario, double leader_price,
                                       const std::vector<double>& prices) {
    scenario.validate();
    if (prices.size() != scenario.msps.size())
        throw std::invalid_argument("one price per provider required");
    if (leader_price < 0.0 || leader_price > scenario.pt.price_cap)
        throw std::invalid_argument("closed form invalid: leader price outside [0, cap]");
    if (!check_saturation_bound(scenario))
        throw std::invalid_argument("closed form invalid: saturation bound fails");

    const double vot = scenario.value_of_time;
    WardropFlow flow;
    flow.x.assign(scenario.msps.size() + 1, 0.0);
    double served = 0.0;
    for (std::size_t j = 0; j < scenario.msps.size(); ++j) {
        if (prices[j] < 0.0) throw std::invalid_argument("negative provider price");
        const double level = (leader_price - prices[j]) / vot + scenario.pt.base_time;
        flow.x[j + 1] = scenario.msps[j].congestion.inverse_clamped(level);
        served += flow.x[j + 1];
    }
    if (served > 1.0 + 1e-9)
        throw std::invalid_argument("closed form invalid: provider demand exceeds total");
    flow.x[0] = std::max(0.0, 1.0 - served);
    flow.validate();
    return flow;
}

} // namespace mobeq
