#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobeq/core/types.hpp"

// Parallel-arc congestion market: one flat-delay public-transport arc and one
// congestible arc per mobility service provider, total demand normalized to
// one flow unit. Generalized cost of an arc ("delay") is price plus
// value-of-time-weighted travel time, in $.

namespace mobeq {

// Travel time of a provider arc as a function of its flow. Strictly
// increasing and convex on [0, inf); value, derivative and inverse must agree.
class CongestionFn {
  public:
    enum class Kind { affine, bpr, custom };

    // alpha + beta*z
    static CongestionFn affine(double alpha, double beta) {
        if (!(alpha >= 0.0)) throw std::invalid_argument("affine congestion: alpha must be >= 0");
        if (!(beta > 0.0)) throw std::invalid_argument("affine congestion: beta must be > 0");
        CongestionFn f;
        f.kind_ = Kind::affine;
        f.a_ = alpha;
        f.b_ = beta;
        return f;
    }

    // t0 * (1 + coefficient*(z/capacity)^exponent)
    static CongestionFn bpr(double free_flow_time, double capacity, double coefficient = 0.15,
                            double exponent = 4.0) {
        if (!(free_flow_time > 0.0) || !(capacity > 0.0) || !(coefficient > 0.0) ||
            !(exponent >= 1.0))
            throw std::invalid_argument("bpr congestion: need t0>0, capacity>0, coef>0, exp>=1");
        CongestionFn f;
        f.kind_ = Kind::bpr;
        f.a_ = free_flow_time;
        f.b_ = capacity;
        f.coef_ = coefficient;
        f.expo_ = exponent;
        return f;
    }

    static CongestionFn custom(std::function<double(double)> value,
                               std::function<double(double)> derivative,
                               std::function<double(double)> inverse) {
        if (!value || !derivative || !inverse)
            throw std::invalid_argument("custom congestion: all three callables required");
        CongestionFn f;
        f.kind_ = Kind::custom;
        f.f_ = std::move(value);
        f.df_ = std::move(derivative);
        f.inv_ = std::move(inverse);
        return f;
    }

    double operator()(double z) const {
        if (z < 0.0) throw std::invalid_argument("congestion evaluated at negative flow");
        switch (kind_) {
            case Kind::affine: return a_ + b_ * z;
            case Kind::bpr: return a_ * (1.0 + coef_ * std::pow(z / b_, expo_));
            default: return f_(z);
        }
    }

    double derivative(double z) const {
        if (z < 0.0) throw std::invalid_argument("congestion derivative at negative flow");
        switch (kind_) {
            case Kind::affine: return b_;
            case Kind::bpr: return a_ * coef_ * expo_ * std::pow(z, expo_ - 1.0) /
                                   std::pow(b_, expo_);
            default: return df_(z);
        }
    }

    // Flow at a given travel time; requires t >= time at zero flow.
    double inverse(double t) const {
        const double t0 = (*this)(0.0);
        if (t < t0 - 1e-12) throw std::invalid_argument("congestion inverse below zero-flow time");
        switch (kind_) {
            case Kind::affine: return std::max(0.0, (t - a_) / b_);
            case Kind::bpr:
                return b_ * std::pow(std::max(0.0, t / a_ - 1.0) / coef_, 1.0 / expo_);
            default: return inv_(t);
        }
    }

    // 0 below the zero-flow time instead of throwing.
    double inverse_clamped(double t) const {
        return (t <= (*this)(0.0)) ? 0.0 : inverse(t);
    }

    Kind kind() const { return kind_; }

    double affine_intercept() const {
        require_affine();
        return a_;
    }
    double affine_slope() const {
        require_affine();
        return b_;
    }

  private:
    void require_affine() const {
        if (kind_ != Kind::affine)
            throw std::logic_error("operation requires an affine congestion function");
    }

    Kind kind_ = Kind::affine;
    double a_ = 0.0, b_ = 1.0, coef_ = 0.15, expo_ = 4.0;
    std::function<double(double)> f_, df_, inv_;
};

// Spot-checks that derivative and inverse belong to the value function.
// Derivative is compared against a Richardson-extrapolated central
// difference; the inverse must round-trip.
inline void validate_congestion_fn(const CongestionFn& fn, const std::vector<double>& samples) {
    for (double z : samples) {
        if (z < 0.0) throw std::invalid_argument("validation samples must be non-negative");
        const double t = fn(z);
        const double back = fn.inverse(t);
        if (std::abs(back - z) > 1e-10 * std::max(1.0, std::abs(z)))
            throw std::invalid_argument("congestion inverse fails to round-trip at flow " +
                                        std::to_string(z));
        const double h = std::max(1e-4, 1e-4 * z);
        if (z - h / 1.0 >= 0.0) {
            auto central = [&](double step) { return (fn(z + step) - fn(z - step)) / (2 * step); };
            const double rich = (4.0 * central(h / 2) - central(h)) / 3.0;
            const double d = fn.derivative(z);
            if (std::abs(d - rich) > std::max(1e-8, 1e-8 * std::abs(rich)))
                throw std::invalid_argument("congestion derivative inconsistent at flow " +
                                            std::to_string(z));
        }
    }
}

// Flat public-transport arc: price is the leader's variable, capped at
// price_cap; base_time is the fixed travel time.
struct PtDelay {
    double price = 0.0;
    double base_time = 0.0;
    double price_cap = 0.0;

    void validate() const {
        if (!(price_cap > 0.0)) throw std::invalid_argument("pt price cap must be positive");
        if (price < 0.0 || price > price_cap)
            throw std::invalid_argument("pt price must lie in [0, price_cap]");
        if (!(base_time >= 0.0)) throw std::invalid_argument("pt base time must be >= 0");
    }
};

struct MspParams {
    std::string name;
    double trip_cost = 0.0;      // cost per served flow unit
    double fleet_cost = 0.0;     // cost per fleet unit held
    double emission_rate = 0.0;  // emission cost per served flow unit
    CongestionFn congestion = CongestionFn::affine(0.0, 1.0);

    double combined_cost() const { return trip_cost + fleet_cost; }

    void validate() const {
        if (trip_cost < 0.0 || fleet_cost < 0.0)
            throw std::invalid_argument("provider costs must be non-negative");
        if (emission_rate < 0.0)
            throw std::invalid_argument("provider emission rate must be non-negative");
    }
};

struct MspStrategy {
    double price = 0.0;
    double fleet = 0.0;

    void validate() const {
        if (price < 0.0 || fleet < 0.0)
            throw std::invalid_argument("provider strategy must be non-negative");
    }
};

// Flow split over [pt, provider 1, ..., provider N]; sums to one.
struct WardropFlow {
    std::vector<double> x;

    double pt_share() const { return x.at(0); }
    double provider_share(std::size_t j) const { return x.at(j + 1); }

    void validate() const {
        double sum = 0.0;
        for (double v : x) {
            if (v < -1e-12) throw std::invalid_argument("flow must be non-negative");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-8)
            throw std::invalid_argument("flows must sum to one");
    }
};

struct CongestionScenario {
    PtDelay pt;
    std::vector<MspParams> msps;
    double value_of_time = 1.0; // $/h
    WelfareWeights weights{1.0, 1.0, 1.0};

    void validate() const {
        pt.validate();
        if (msps.empty()) throw std::invalid_argument("scenario needs at least one provider");
        for (const auto& m : msps) m.validate();
        if (!(value_of_time > 0.0)) throw std::invalid_argument("value of time must be positive");
        weights.validate();
    }
};

// Generalized cost of the public-transport arc, flow-independent.
inline double delay(const PtDelay& pt, double price, double value_of_time) {
    if (price < 0.0) throw std::invalid_argument("negative pt price");
    return price + value_of_time * pt.base_time;
}

inline double delay(const PtDelay& pt, double value_of_time) {
    return delay(pt, pt.price, value_of_time);
}

// Generalized cost of a provider arc at flow z; +inf past the fleet cap (the
// sentinel is a comparison value, never an operand).
inline double delay(const MspParams& msp, const MspStrategy& strategy, double value_of_time,
                    double z) {
    if (z < 0.0) throw std::invalid_argument("negative flow");
    strategy.validate();
    if (z > strategy.fleet) return std::numeric_limits<double>::infinity();
    return strategy.price + value_of_time * msp.congestion(z);
}

// Total uncapped provider demand when the leader charges the cap and
// providers ride free: the worst case the providers can ever absorb.
inline double saturation_level(const CongestionScenario& scenario) {
    const double target = scenario.pt.price_cap / scenario.value_of_time + scenario.pt.base_time;
    double sum = 0.0;
    for (const auto& m : scenario.msps) sum += m.congestion.inverse_clamped(target);
    return sum;
}

// True when that worst-case demand still fits within the unit of total
// demand, i.e. the public-transport arc never empties out.
inline bool check_saturation_bound(const CongestionScenario& scenario) {
    return saturation_level(scenario) <= 1.0;
}

} // namespace mobeq
