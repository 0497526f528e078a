#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "actions.hpp"
#include "graph.hpp"

// Customer-side demand model. Each demand sees the door-to-door amod ride and
// one best conventional alternative (pt, mm, taxi, or walking — whichever
// minimizes fare plus time valued at the mean value of time). A uniform
// value-of-time distribution then turns the amod-vs-alternative comparison
// into a linear price-demand reaction curve.

namespace mobeq {

struct VotDistribution {
    double lower = 10.0; // $/h
    double upper = 17.0;

    double mean() const { return 0.5 * (lower + upper); }

    void validate() const {
        if (!(0.0 < lower && lower < upper))
            throw std::invalid_argument("value-of-time bounds must satisfy 0 < lower < upper");
    }
};

// Inverse demand p(x) = m*x + q on the served-flow domain [0, alpha].
struct ReactionCurve {
    double m = -1.0; // $ per (customer/h), negative
    double q = 0.0;  // choke price
    double alpha = 0.0;

    double price_at(double flow) const { return m * flow + q; }
    double served_at(double price) const {
        return std::clamp((price - q) / m, 0.0, alpha);
    }

    void validate() const {
        if (!(m < 0.0)) throw std::invalid_argument("reaction curve slope must be negative");
        if (!(alpha > 0.0)) throw std::invalid_argument("reaction curve needs positive demand");
        if (!std::isfinite(q)) throw std::invalid_argument("reaction curve intercept must be finite");
    }
};

struct AltOption {
    Mode mode = Mode::walk;
    double time_hours = 0.0;
    double price = 0.0;
    ModeTrip trip;
};

// Best conventional option for one demand at the mean value of time. Ties
// resolve in the fixed order pt, mm, taxi, walk. Throws if the demand cannot
// reach its destination on any conventional mode.
inline AltOption alternative_option(const MobilityMultigraph& graph, const Demand& demand,
                                    const MmAction& mm_action, const TaxiAction& taxi_action,
                                    const MunicipalityAction& municipality,
                                    const CostTables& tables, double mean_vot) {
    const PathTiming timing = tables.path_timing(mm_action.vehicle);
    std::optional<AltOption> best;
    double best_cost = std::numeric_limits<double>::infinity();
    auto consider = [&](Mode mode) {
        auto trip = shortest_path_mode(graph, mode, demand.origin, demand.destination, timing);
        if (!trip) return;
        // A vehicle-mode path that never touches its vehicle is just walking;
        // leave it to the walk candidate rather than fare a zero-mile ride.
        if (mode != Mode::walk && trip->mode_distance_miles <= 0.0) return;
        double price = 0.0;
        switch (mode) {
            case Mode::pt:
                price = pt_fare(trip->mode_distance_miles, municipality);
                break;
            case Mode::mm:
                price = mm_action.base_price +
                        mm_action.variable_price * trip->mode_distance_miles;
                break;
            case Mode::taxi:
                price = taxi_action.base_price +
                        taxi_action.variable_price * trip->mode_distance_miles;
                break;
            default:
                break;
        }
        const double cost = price + mean_vot * trip->time_hours;
        if (cost < best_cost) {
            best_cost = cost;
            best = AltOption{mode, trip->time_hours, price, std::move(*trip)};
        }
    };
    consider(Mode::pt);
    consider(Mode::mm);
    consider(Mode::taxi);
    consider(Mode::walk);
    if (!best)
        throw std::runtime_error("isolated demand: no conventional mode connects vertex " +
                                 std::to_string(demand.origin) + " to vertex " +
                                 std::to_string(demand.destination));
    return *best;
}

// Linear reaction curve from the uniform value-of-time tail. A customer with
// value v rides amod iff v*t_amod + p <= v*t_alt + p_alt, so the served share
// is the tail probability of the uniform distribution; inverting the interior
// segment gives p(x) = m*x + q. When amod is slower the marginal customer
// comes from the low end instead of the high end of the distribution, and the
// time gap below `degenerate_gap_hours` collapses to an all-or-nothing
// comparison represented by a steep curve pinned at the alternative's price.
inline ReactionCurve build_reaction_curve(const Demand& demand, double t_amod_hours,
                                          const AltOption& alternative,
                                          const VotDistribution& vot,
                                          double degenerate_gap_hours = 1e-6) {
    vot.validate();
    if (!(demand.rate > 0.0)) throw std::invalid_argument("demand rate must be positive");
    if (!(t_amod_hours >= 0.0) || !(alternative.time_hours >= 0.0))
        throw std::invalid_argument("travel times must be non-negative");
    const double gap = alternative.time_hours - t_amod_hours;
    const double spread = vot.upper - vot.lower;
    ReactionCurve curve;
    curve.alpha = demand.rate;
    if (std::abs(gap) <= degenerate_gap_hours) {
        curve.m = -spread * degenerate_gap_hours / demand.rate;
        curve.q = alternative.price + vot.upper * degenerate_gap_hours;
    } else if (gap > 0.0) {
        curve.m = -spread * gap / demand.rate;
        curve.q = alternative.price + vot.upper * gap;
    } else {
        curve.m = spread * gap / demand.rate; // gap < 0 keeps the slope negative
        curve.q = alternative.price + vot.lower * gap;
    }
    curve.validate();
    return curve;
}

} // namespace mobeq
