#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mobeq {

using ActionIndex = int;

// Finite ordered list of action labels for one player. Labels are opaque to
// the game engine; they only matter for reporting.
struct ActionSpace {
    int player_id = 0;
    std::vector<std::string> labels;

    std::size_t size() const { return labels.size(); }

    void validate() const {
        if (labels.empty())
            throw std::invalid_argument("action space for player " +
                                        std::to_string(player_id) + " is empty");
        for (std::size_t i = 0; i < labels.size(); ++i)
            for (std::size_t j = i + 1; j < labels.size(); ++j)
                if (labels[i] == labels[j])
                    throw std::invalid_argument("duplicate action label '" + labels[i] +
                                                "' for player " + std::to_string(player_id));
    }
};

// One action index per player, leader first.
struct StrategyProfile {
    std::vector<ActionIndex> indices;

    ActionIndex leader() const { return indices.at(0); }
    friend bool operator==(const StrategyProfile&, const StrategyProfile&) = default;
    friend auto operator<=>(const StrategyProfile& a, const StrategyProfile& b) {
        return a.indices <=> b.indices;
    }
};

// System-level outcome measures, all in $/h of system operation.
struct MetricsTriple {
    double customer_cost = 0.0;
    double emission_cost = 0.0;
    double public_revenue = 0.0;

    void validate() const {
        if (!(std::isfinite(customer_cost) && std::isfinite(emission_cost) &&
              std::isfinite(public_revenue)))
            throw std::invalid_argument("metrics must be finite");
        if (customer_cost < 0.0 || emission_cost < 0.0)
            throw std::invalid_argument("customer/emission cost must be non-negative");
    }
};

// Leader objective weights: welfare = -k1*C - k2*E + k3*R.
struct WelfareWeights {
    double customer_cost = 1.0;  // k1
    double emission_cost = 1.0;  // k2
    double public_revenue = 1.0; // k3

    void validate() const {
        if (customer_cost < 0 || emission_cost < 0 || public_revenue < 0)
            throw std::invalid_argument("welfare weights must be non-negative");
        if (customer_cost == 0 && emission_cost == 0 && public_revenue == 0)
            throw std::invalid_argument("welfare weights must not all be zero");
    }

    double welfare(const MetricsTriple& m) const {
        return -customer_cost * m.customer_cost - emission_cost * m.emission_cost +
               public_revenue * m.public_revenue;
    }
};

// What an oracle returns for one full profile.
struct ProfileEvaluation {
    std::vector<double> payoffs; // one per player, leader first
    MetricsTriple metrics;
};

// Pure payoff map: same profile in, same evaluation out, defined on the whole
// product space. Anything invocable with that shape qualifies.
template <typename F>
concept payoff_oracle =
    std::invocable<const F&, const StrategyProfile&> &&
    std::convertible_to<std::invoke_result_t<const F&, const StrategyProfile&>,
                        ProfileEvaluation>;

// One equilibrium candidate with everything reporting needs.
struct EquilibriumRecord {
    StrategyProfile profile;
    std::vector<double> payoffs;
    MetricsTriple metrics;
    double leader_welfare = 0.0;
};

} // namespace mobeq
