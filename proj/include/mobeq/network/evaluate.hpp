#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "../core/types.hpp"
#include "../solvers/qp.hpp"
#include "actions.hpp"
#include "amod_qp.hpp"
#include "choice.hpp"
#include "graph.hpp"

// Full evaluation of one action profile on a city instance: route customers,
// price the amod service through its QP, settle every remaining customer on
// their best conventional option, and account profits, customer cost,
// emission cost, and public revenue. All rates are per hour of steady-state
// operation.

namespace mobeq {

struct NetworkScenario {
    MobilityMultigraph graph; // nominal (uncongested) times
    std::vector<Demand> demands;
    CostTables tables;
    VotDistribution vot;
    WelfareWeights weights;

    void validate() const {
        graph.validate();
        if (demands.empty()) throw std::invalid_argument("scenario has no demands");
        for (const Demand& d : demands) d.validate(graph.vertex_count);
        tables.validate();
        vot.validate();
        weights.validate();
    }
};

// Action-independent precomputation: congestion-adjusted graph, each demand's
// door-to-door amod routing, and the subgraph's average speed (used to turn
// the per-mile vehicle depreciation into a per-hour fleet capital rate).
struct PreparedNetwork {
    MobilityMultigraph graph;
    std::vector<Demand> demands;
    CostTables tables;
    VotDistribution vot;
    WelfareWeights weights;
    std::vector<std::optional<ModeTrip>> amod_trips;
    double amod_mean_speed_mph = 0.0;
};

inline PreparedNetwork prepare_network(const NetworkScenario& scenario) {
    scenario.validate();
    PreparedNetwork prepared{congestion_adjust(scenario.graph, scenario.tables.congestion_factor),
                             scenario.demands,
                             scenario.tables,
                             scenario.vot,
                             scenario.weights,
                             {},
                             0.0};
    prepared.amod_trips.reserve(prepared.demands.size());
    for (const Demand& d : prepared.demands)
        prepared.amod_trips.push_back(
            shortest_path_mode(prepared.graph, Mode::amod, d.origin, d.destination));
    double miles = 0.0, hours = 0.0;
    for (const Arc& a : prepared.graph.arcs)
        if (a.mode == Mode::amod) {
            miles += a.length_miles;
            hours += a.time_hours;
        }
    prepared.amod_mean_speed_mph = hours > 0.0 ? miles / hours : 0.0;
    return prepared;
}

// Flow-weighted distance/volume totals behind the metrics, exposed so the
// emission accounting can be audited independently and so exports can
// classify rows by modal share.
struct FlowBreakdown {
    double total_demand = 0.0;
    double amod_flow = 0.0;
    double pt_flow = 0.0;
    double mm_flow = 0.0;
    double taxi_flow = 0.0;
    double walk_flow = 0.0;
    double amod_customer_miles = 0.0;
    double amod_empty_miles = 0.0;
    double taxi_miles = 0.0;
    double mm_miles = 0.0;
};

struct NetworkEvaluation {
    ProfileEvaluation evaluation; // payoffs: leader welfare, amod, mm, taxi
    FlowBreakdown flows;
    double amod_share = 0.0;
    QpStatus qp_status = QpStatus::optimal;
    double qp_kkt = 0.0;
    int qp_iterations = 0;
};

inline NetworkEvaluation evaluate_profile(const PreparedNetwork& net,
                                          const MunicipalityAction& municipality,
                                          const AmodAction& amod, const MmAction& mm,
                                          const TaxiAction& taxi,
                                          const QpOptions& qp_options = {}) {
    municipality.validate();
    amod.validate();
    mm.validate();
    taxi.validate();

    const double mean_vot = net.vot.mean();
    const std::size_t M = net.demands.size();

    std::vector<AltOption> alternatives;
    alternatives.reserve(M);
    std::vector<ReactionCurve> curves(M);
    for (std::size_t i = 0; i < M; ++i) {
        const Demand& d = net.demands[i];
        alternatives.push_back(
            alternative_option(net.graph, d, mm, taxi, municipality, net.tables, mean_vot));
        if (net.amod_trips[i]) {
            const double t_amod = net.amod_trips[i]->time_hours + net.tables.amod_wait_hours;
            curves[i] = build_reaction_curve(d, t_amod, alternatives[i], net.vot);
        }
    }

    NetworkEvaluation out;
    FlowBreakdown& flows = out.flows;
    std::vector<double> served(M, 0.0); // amod flow per demand
    double amod_profit = 0.0;

    const bool run_qp = amod.fleet_size > 0.0 && net.amod_mean_speed_mph > 0.0;
    AmodQp assembled;
    if (run_qp) {
        assembled = assemble_amod_qp(net.graph, net.demands, net.amod_trips, curves, amod,
                                     municipality, net.tables);
        const QpSolution sol = solve_qp(assembled.problem, qp_options);
        out.qp_status = sol.status;
        out.qp_kkt = sol.kkt_residual();
        out.qp_iterations = sol.iterations;
        if (sol.status != QpStatus::optimal)
            throw std::runtime_error(std::string("amod pricing solve ") + to_string(sol.status) +
                                     " at profile " + municipality.label() + " / " +
                                     amod.label() + " / " + mm.label() + " / " + taxi.label());
        for (int k = 0; k < assembled.flow_variables(); ++k) {
            const std::size_t i =
                static_cast<std::size_t>(assembled.served_demands[static_cast<std::size_t>(k)]);
            served[i] = std::clamp(sol.x[k], 0.0, curves[i].alpha);
            flows.amod_customer_miles +=
                served[i] * assembled.path_length_miles[static_cast<std::size_t>(k)];
        }
        for (std::size_t j = 0; j < assembled.rebalance_arcs.size(); ++j) {
            const double f = std::max(0.0, sol.x[assembled.flow_variables() + static_cast<int>(j)]);
            const Arc& a = net.graph.arcs[static_cast<std::size_t>(assembled.rebalance_arcs[j])];
            flows.amod_empty_miles += f * a.length_miles;
        }
        amod_profit = -sol.objective; // solver minimizes the negated profit
    }
    if (amod.fleet_size > 0.0) {
        // Hourly capital charge: the fleet jointly covers mean-speed miles per
        // hour, each mile consuming purchase price / lifetime miles.
        const VehicleCostRow& row = net.tables.vehicle(amod.automation, amod.engine);
        amod_profit -= row.fixed_usd * amod.fleet_size * net.amod_mean_speed_mph /
                       net.tables.vehicle_life_miles;
    }

    MetricsTriple metrics;
    double mm_profit = 0.0, taxi_profit = 0.0;
    const VehicleCostRow& amod_row = net.tables.vehicle(amod.automation, amod.engine);
    const VehicleCostRow& taxi_row = net.tables.vehicle(Automation::sv, Engine::icev);
    double emission_kg = 0.0;

    for (std::size_t i = 0; i < M; ++i) {
        const Demand& d = net.demands[i];
        const AltOption& alt = alternatives[i];
        flows.total_demand += d.rate;
        if (served[i] > 0.0) {
            const double price = curves[i].price_at(served[i]);
            const double t_amod = net.amod_trips[i]->time_hours + net.tables.amod_wait_hours;
            metrics.customer_cost += served[i] * (price + mean_vot * t_amod);
            flows.amod_flow += served[i];
        }
        const double rest = std::max(0.0, d.rate - served[i]);
        if (rest <= 0.0) continue;
        metrics.customer_cost += rest * (alt.price + mean_vot * alt.time_hours);
        switch (alt.mode) {
            case Mode::pt:
                metrics.public_revenue += rest * alt.price;
                flows.pt_flow += rest;
                break;
            case Mode::mm: {
                const double ride = alt.trip.mode_distance_miles;
                mm_profit += rest * (alt.price - net.tables.mm_cost(mm.vehicle) * ride);
                emission_kg += rest * ride * net.tables.mm_emissions(mm.vehicle);
                flows.mm_miles += rest * ride;
                flows.mm_flow += rest;
                break;
            }
            case Mode::taxi: {
                const double ride = alt.trip.mode_distance_miles;
                const double cost_rate = taxi_row.operational_usd_per_mile +
                                         taxi_row.fixed_usd / net.tables.vehicle_life_miles;
                taxi_profit += rest * (alt.price - cost_rate * ride);
                emission_kg += rest * ride * taxi_row.emissions_kg_per_mile;
                flows.taxi_miles += rest * ride;
                flows.taxi_flow += rest;
                break;
            }
            default:
                flows.walk_flow += rest;
                break;
        }
    }

    const double av_miles = flows.amod_customer_miles + flows.amod_empty_miles;
    emission_kg += av_miles * amod_row.emissions_kg_per_mile;
    if (amod.automation == Automation::av) {
        metrics.public_revenue += municipality.mile_tax * av_miles +
                                  municipality.empty_mile_tax() * flows.amod_empty_miles;
    }
    metrics.emission_cost = net.tables.co2_price_usd_per_kg * emission_kg;
    metrics.validate();

    out.amod_share = flows.total_demand > 0.0 ? flows.amod_flow / flows.total_demand : 0.0;
    out.evaluation.metrics = metrics;
    out.evaluation.payoffs = {net.weights.welfare(metrics), amod_profit, mm_profit, taxi_profit};
    return out;
}

} // namespace mobeq
