#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "../solvers/qp.hpp"
#include "actions.hpp"
#include "choice.hpp"
#include "graph.hpp"

// Assembly of the amod operator's pricing problem. Decision variables are the
// served flow of each reachable demand (priced implicitly through its
// reaction curve) and the empty rebalancing flow on every amod arc. Profit
//   sum_i [x_i (m_i x_i + q_i) - (path cost_i) x_i] - sum_j c0_j f0_j
// is maximized subject to vehicle conservation at every amod node and a
// fleet-hours budget; we hand the solver its negation as a convex minimization.
// Per-mile cost on an arc is operational + purchase-price depreciation plus,
// for automated fleets, the distance tax (and the extra empty-mile tax on
// rebalancing flow).

namespace mobeq {

struct AmodQp {
    QpProblem problem;
    std::vector<int> served_demands; // demand indices behind x variables, in order
    std::vector<int> rebalance_arcs; // amod arc ids behind f0 variables, in order
    std::vector<double> path_time_hours;   // driving time per served demand
    std::vector<double> path_length_miles; // driven distance per served demand
    double cost_per_mile = 0.0;            // customer-flow arc cost rate
    double empty_cost_per_mile = 0.0;      // rebalancing arc cost rate

    int flow_variables() const { return static_cast<int>(served_demands.size()); }
    int variables() const {
        return static_cast<int>(served_demands.size() + rebalance_arcs.size());
    }
};

inline AmodQp assemble_amod_qp(const MobilityMultigraph& graph,
                               const std::vector<Demand>& demands,
                               const std::vector<std::optional<ModeTrip>>& amod_trips,
                               const std::vector<ReactionCurve>& curves,
                               const AmodAction& amod, const MunicipalityAction& municipality,
                               const CostTables& tables) {
    if (amod_trips.size() != demands.size() || curves.size() != demands.size())
        throw std::invalid_argument("per-demand inputs must align with the demand list");
    if (!(amod.fleet_size >= 0.0)) throw std::invalid_argument("fleet size must be non-negative");

    AmodQp out;
    const bool taxed = amod.automation == Automation::av;
    const VehicleCostRow& row = tables.vehicle(amod.automation, amod.engine);
    out.cost_per_mile = row.operational_usd_per_mile + row.fixed_usd / tables.vehicle_life_miles +
                        (taxed ? municipality.mile_tax : 0.0);
    out.empty_cost_per_mile =
        out.cost_per_mile + (taxed ? municipality.empty_mile_tax() : 0.0);

    for (std::size_t id = 0; id < graph.arcs.size(); ++id)
        if (graph.arcs[id].mode == Mode::amod) out.rebalance_arcs.push_back(static_cast<int>(id));
    for (std::size_t i = 0; i < demands.size(); ++i)
        if (amod_trips[i]) out.served_demands.push_back(static_cast<int>(i));

    const int nx = out.flow_variables();
    const int nf = static_cast<int>(out.rebalance_arcs.size());
    const int n = nx + nf;

    // Conservation rows cover every vertex an amod arc touches.
    std::vector<int> vertex_row(static_cast<std::size_t>(graph.vertex_count), -1);
    int rows = 0;
    for (int id : out.rebalance_arcs) {
        const Arc& a = graph.arcs[static_cast<std::size_t>(id)];
        if (vertex_row[static_cast<std::size_t>(a.source)] < 0)
            vertex_row[static_cast<std::size_t>(a.source)] = rows++;
        if (vertex_row[static_cast<std::size_t>(a.target)] < 0)
            vertex_row[static_cast<std::size_t>(a.target)] = rows++;
    }

    const int fleet_rows = n > 0 ? 1 : 0; // an empty subgraph leaves nothing to constrain
    QpProblem& qp = out.problem;
    qp.P = Eigen::MatrixXd::Zero(n, n);
    qp.q = Eigen::VectorXd::Zero(n);
    qp.A = Eigen::MatrixXd::Zero(rows, n);
    qp.b = Eigen::VectorXd::Zero(rows);
    qp.G = Eigen::MatrixXd::Zero(fleet_rows, n);
    qp.h = Eigen::VectorXd::Zero(fleet_rows);
    qp.lower = Eigen::VectorXd::Zero(n);
    qp.upper = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());

    out.path_time_hours.assign(static_cast<std::size_t>(nx), 0.0);
    out.path_length_miles.assign(static_cast<std::size_t>(nx), 0.0);

    for (int k = 0; k < nx; ++k) {
        const std::size_t i = static_cast<std::size_t>(out.served_demands[static_cast<std::size_t>(k)]);
        const ModeTrip& trip = *amod_trips[i];
        const ReactionCurve& curve = curves[i];
        curve.validate();
        double path_cost = 0.0, path_time = 0.0, path_len = 0.0;
        for (int id : trip.arc_ids) {
            const Arc& a = graph.arcs[static_cast<std::size_t>(id)];
            path_cost += out.cost_per_mile * a.length_miles;
            path_time += a.time_hours;
            path_len += a.length_miles;
            const int sr = vertex_row[static_cast<std::size_t>(a.source)];
            const int tr = vertex_row[static_cast<std::size_t>(a.target)];
            qp.A(sr, k) -= 1.0; // customer flow leaves the source...
            qp.A(tr, k) += 1.0; // ...and arrives at the target
        }
        out.path_time_hours[static_cast<std::size_t>(k)] = path_time;
        out.path_length_miles[static_cast<std::size_t>(k)] = path_len;
        qp.P(k, k) = -2.0 * curve.m;              // negated concave revenue term
        qp.q[k] = path_cost - curve.q;            // negated linear margin
        qp.upper[k] = curve.alpha;
        qp.G(0, k) = path_time;                   // vehicle-hours to serve one unit of flow
    }
    for (int j = 0; j < nf; ++j) {
        const Arc& a = graph.arcs[static_cast<std::size_t>(out.rebalance_arcs[static_cast<std::size_t>(j)])];
        const int col = nx + j;
        qp.q[col] = out.empty_cost_per_mile * a.length_miles;
        qp.A(vertex_row[static_cast<std::size_t>(a.source)], col) -= 1.0;
        qp.A(vertex_row[static_cast<std::size_t>(a.target)], col) += 1.0;
        qp.G(0, col) = a.time_hours;
    }
    if (fleet_rows > 0) qp.h[0] = amod.fleet_size;
    return out;
}

} // namespace mobeq
