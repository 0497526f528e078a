#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "mobeq/core/types.hpp"

// Pure-strategy equilibrium machinery for one leader + finitely many
// followers. Everything works off a payoff oracle; nothing here knows what
// the actions mean.

namespace mobeq {

struct NashOptions {
    // Deviations must improve by more than this to break an equilibrium;
    // absorbs numerical-solver noise in the payoffs.
    double payoff_tolerance = 1e-9;
};

// How the leader resolves multiplicity of follower equilibria: optimistic
// assumes the followers settle on the NE the leader likes best (strong
// Stackelberg), pessimistic on the one it likes least.
enum class NeSelection { optimistic, pessimistic };

struct InductionOptions {
    NashOptions nash{};
    NeSelection selection = NeSelection::optimistic;
};

namespace detail {

inline std::vector<std::size_t> space_sizes(const std::vector<ActionSpace>& spaces) {
    std::vector<std::size_t> sizes;
    sizes.reserve(spaces.size());
    for (const auto& s : spaces) sizes.push_back(s.size());
    return sizes;
}

inline std::size_t product_size(const std::vector<std::size_t>& sizes) {
    std::size_t n = 1;
    for (std::size_t s : sizes) {
        if (s == 0) return 0;
        if (n > (std::size_t{1} << 26) / s)
            throw std::length_error("profile product space too large to enumerate");
        n *= s;
    }
    return n;
}

// Linear index <-> tuple in lexicographic order (first coordinate slowest).
inline void decode_tuple(std::size_t linear, const std::vector<std::size_t>& sizes,
                         std::vector<ActionIndex>& out) {
    out.resize(sizes.size());
    for (std::size_t k = sizes.size(); k-- > 0;) {
        out[k] = static_cast<ActionIndex>(linear % sizes[k]);
        linear /= sizes[k];
    }
}

inline std::size_t encode_tuple(const std::vector<ActionIndex>& tuple,
                                const std::vector<std::size_t>& sizes) {
    std::size_t linear = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k)
        linear = linear * sizes[k] + static_cast<std::size_t>(tuple[k]);
    return linear;
}

inline void require_followers(const std::vector<ActionSpace>& followers) {
    if (followers.empty())
        throw std::invalid_argument("degenerate game: no follower action spaces");
    for (const auto& s : followers)
        if (s.size() == 0)
            throw std::invalid_argument("degenerate game: empty action space for player " +
                                        std::to_string(s.player_id));
}

template <payoff_oracle O>
ProfileEvaluation eval_checked(const O& oracle, const StrategyProfile& p,
                               std::size_t player_count) {
    ProfileEvaluation ev = oracle(p);
    if (ev.payoffs.size() != player_count)
        throw std::logic_error("oracle returned " + std::to_string(ev.payoffs.size()) +
                               " payoffs for a " + std::to_string(player_count) +
                               "-player game");
    return ev;
}

// Dense follower-product evaluation table for one leader action.
template <payoff_oracle O>
std::vector<ProfileEvaluation> follower_table(const std::vector<ActionSpace>& followers,
                                              const O& oracle, ActionIndex leader_action,
                                              const std::vector<std::size_t>& sizes) {
    const std::size_t total = product_size(sizes);
    std::vector<ProfileEvaluation> table(total);
    StrategyProfile p;
    p.indices.resize(followers.size() + 1);
    p.indices[0] = leader_action;
    std::vector<ActionIndex> tuple;
    for (std::size_t linear = 0; linear < total; ++linear) {
        decode_tuple(linear, sizes, tuple);
        std::copy(tuple.begin(), tuple.end(), p.indices.begin() + 1);
        table[linear] = eval_checked(oracle, p, followers.size() + 1);
    }
    return table;
}

inline bool finite_payoffs(const ProfileEvaluation& ev) {
    return std::all_of(ev.payoffs.begin(), ev.payoffs.end(),
                       [](double v) { return std::isfinite(v); });
}

// Is tuple `linear` a follower Nash equilibrium in the given dense table?
inline bool tuple_is_nash(std::size_t linear, const std::vector<ProfileEvaluation>& table,
                          const std::vector<std::size_t>& sizes, double tol) {
    if (!finite_payoffs(table[linear])) return false;
    // Stride of follower k in the linear index.
    std::size_t stride = 1;
    std::vector<std::size_t> strides(sizes.size());
    for (std::size_t k = sizes.size(); k-- > 0;) {
        strides[k] = stride;
        stride *= sizes[k];
    }
    std::vector<ActionIndex> tuple;
    decode_tuple(linear, sizes, tuple);
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const double own = table[linear].payoffs[k + 1];
        const std::size_t base = linear - static_cast<std::size_t>(tuple[k]) * strides[k];
        for (std::size_t alt = 0; alt < sizes[k]; ++alt) {
            if (alt == static_cast<std::size_t>(tuple[k])) continue;
            const double dev = table[base + alt * strides[k]].payoffs[k + 1];
            if (std::isfinite(dev) && dev > own + tol) return false;
        }
    }
    return true;
}

} // namespace detail

// All pure Nash equilibria of the follower game induced by one leader action,
// in lexicographic tuple order.
template <payoff_oracle O>
std::vector<StrategyProfile> enumerate_pure_nash(const std::vector<ActionSpace>& followers,
                                                 const O& oracle, ActionIndex leader_action,
                                                 const NashOptions& options = {}) {
    detail::require_followers(followers);
    const auto sizes = detail::space_sizes(followers);
    const auto table = detail::follower_table(followers, oracle, leader_action, sizes);

    std::vector<StrategyProfile> out;
    std::vector<ActionIndex> tuple;
    for (std::size_t linear = 0; linear < table.size(); ++linear) {
        if (!detail::tuple_is_nash(linear, table, sizes, options.payoff_tolerance)) continue;
        detail::decode_tuple(linear, sizes, tuple);
        StrategyProfile p;
        p.indices.reserve(tuple.size() + 1);
        p.indices.push_back(leader_action);
        p.indices.insert(p.indices.end(), tuple.begin(), tuple.end());
        out.push_back(std::move(p));
    }
    return out;
}

namespace detail {

// Canonical "is a better for the leader than b": higher welfare, ties broken by
// lower customer cost, lower emission cost, then profile order. Exact
// comparisons keep the choice deterministic.
inline bool record_better(const EquilibriumRecord& a, const EquilibriumRecord& b) {
    if (a.leader_welfare != b.leader_welfare) return a.leader_welfare > b.leader_welfare;
    if (a.metrics.customer_cost != b.metrics.customer_cost)
        return a.metrics.customer_cost < b.metrics.customer_cost;
    if (a.metrics.emission_cost != b.metrics.emission_cost)
        return a.metrics.emission_cost < b.metrics.emission_cost;
    return a.profile < b.profile;
}

// Worse-welfare ordering used to pick the pessimistic representative.
inline bool record_worse(const EquilibriumRecord& a, const EquilibriumRecord& b) {
    if (a.leader_welfare != b.leader_welfare) return a.leader_welfare < b.leader_welfare;
    if (a.metrics.customer_cost != b.metrics.customer_cost)
        return a.metrics.customer_cost < b.metrics.customer_cost;
    if (a.metrics.emission_cost != b.metrics.emission_cost)
        return a.metrics.emission_cost < b.metrics.emission_cost;
    return a.profile < b.profile;
}

} // namespace detail

// Leader optimum by backward induction over the leader's action list. For
// each leader action the follower equilibria are enumerated; the one the
// selection policy picks represents that action; the leader takes the
// representative with the highest welfare. Throws if no leader action admits
// a follower equilibrium.
template <payoff_oracle O>
EquilibriumRecord backward_induction(const ActionSpace& leader_space,
                                     const std::vector<ActionSpace>& followers,
                                     const O& oracle, const WelfareWeights& weights,
                                     const InductionOptions& options = {}) {
    leader_space.validate();
    weights.validate();
    detail::require_followers(followers);

    std::optional<EquilibriumRecord> best;
    for (ActionIndex l = 0; l < static_cast<ActionIndex>(leader_space.size()); ++l) {
        auto nes = enumerate_pure_nash(followers, oracle, l, options.nash);
        std::optional<EquilibriumRecord> rep;
        for (auto& p : nes) {
            EquilibriumRecord rec;
            auto ev = detail::eval_checked(oracle, p, followers.size() + 1);
            rec.profile = std::move(p);
            rec.payoffs = std::move(ev.payoffs);
            rec.metrics = ev.metrics;
            rec.leader_welfare = weights.welfare(rec.metrics);
            const bool take =
                !rep || (options.selection == NeSelection::optimistic
                             ? detail::record_better(rec, *rep)
                             : detail::record_worse(rec, *rep));
            if (take) rep = std::move(rec);
        }
        if (rep && (!best || detail::record_better(*rep, *best))) best = std::move(*rep);
    }
    if (!best) throw std::runtime_error("no equilibrium");
    return *best;
}

// Checks the full equilibrium condition for a candidate profile: the realized
// follower tuple must be a Nash equilibrium under the realized leader action,
// and no leader deviation may be profitable even against the least favorable
// follower reply (off-path follower behaviour is unconstrained, so the
// deviation payoff is the worst case over all reply tuples).
template <payoff_oracle O>
bool is_equilibrium(const StrategyProfile& profile, const ActionSpace& leader_space,
                    const std::vector<ActionSpace>& followers, const O& oracle,
                    const WelfareWeights& weights, const NashOptions& options = {}) {
    leader_space.validate();
    weights.validate();
    detail::require_followers(followers);
    if (profile.indices.size() != followers.size() + 1)
        throw std::invalid_argument("profile length does not match player count");
    if (profile.leader() < 0 || profile.leader() >= static_cast<ActionIndex>(leader_space.size()))
        throw std::invalid_argument("leader action index out of range");
    for (std::size_t k = 0; k < followers.size(); ++k)
        if (profile.indices[k + 1] < 0 ||
            profile.indices[k + 1] >= static_cast<ActionIndex>(followers[k].size()))
            throw std::invalid_argument("follower action index out of range");

    const auto sizes = detail::space_sizes(followers);
    const double tol = options.payoff_tolerance;

    // Follower side at the realized leader action.
    const auto table = detail::follower_table(followers, oracle, profile.leader(), sizes);
    std::vector<ActionIndex> tuple(profile.indices.begin() + 1, profile.indices.end());
    const std::size_t linear = detail::encode_tuple(tuple, sizes);
    if (!detail::tuple_is_nash(linear, table, sizes, tol)) return false;
    const double realized = weights.welfare(table[linear].metrics);

    // Leader side: each deviation is valued at its worst reply tuple.
    for (ActionIndex l = 0; l < static_cast<ActionIndex>(leader_space.size()); ++l) {
        if (l == profile.leader()) continue;
        const auto dev_table = detail::follower_table(followers, oracle, l, sizes);
        double threat = std::numeric_limits<double>::infinity();
        for (const auto& ev : dev_table) threat = std::min(threat, weights.welfare(ev.metrics));
        if (threat > realized + tol) return false;
    }
    return true;
}

// a Pareto-dominates b on (customer cost, emission cost, revenue).
inline bool dominates(const EquilibriumRecord& a, const EquilibriumRecord& b) {
    const bool no_worse = a.metrics.customer_cost <= b.metrics.customer_cost &&
                          a.metrics.emission_cost <= b.metrics.emission_cost &&
                          a.metrics.public_revenue >= b.metrics.public_revenue;
    const bool strict = a.metrics.customer_cost < b.metrics.customer_cost ||
                        a.metrics.emission_cost < b.metrics.emission_cost ||
                        a.metrics.public_revenue > b.metrics.public_revenue;
    return no_worse && strict;
}

// Indices (ascending, original order) of the non-dominated records. Presorts
// by (C asc, E asc, R desc) so any dominator of a record precedes it, then
// scans against the retained front only.
inline std::vector<std::size_t> dominance_filter_indices(
    const std::vector<EquilibriumRecord>& records) {
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        const auto& a = records[i].metrics;
        const auto& b = records[j].metrics;
        if (a.customer_cost != b.customer_cost) return a.customer_cost < b.customer_cost;
        if (a.emission_cost != b.emission_cost) return a.emission_cost < b.emission_cost;
        if (a.public_revenue != b.public_revenue) return a.public_revenue > b.public_revenue;
        return i < j;
    });

    std::vector<std::size_t> front;
    for (std::size_t idx : order) {
        bool beaten = false;
        for (std::size_t f : front)
            if (dominates(records[f], records[idx])) {
                beaten = true;
                break;
            }
        if (!beaten) front.push_back(idx);
    }
    std::sort(front.begin(), front.end());
    return front;
}

inline std::vector<EquilibriumRecord> dominance_filter(
    const std::vector<EquilibriumRecord>& records) {
    std::vector<EquilibriumRecord> out;
    for (std::size_t i : dominance_filter_indices(records)) out.push_back(records[i]);
    return out;
}

// Welfare-optimal record under the given weights. Ties go to lower customer
// cost, then lower emission cost, then profile order, then input position.
inline std::size_t select_welfare_index(const std::vector<EquilibriumRecord>& records,
                                        const WelfareWeights& weights) {
    weights.validate();
    if (records.empty()) throw std::invalid_argument("no records to select from");
    std::size_t best = 0;
    double best_w = weights.welfare(records[0].metrics);
    for (std::size_t i = 1; i < records.size(); ++i) {
        const double w = weights.welfare(records[i].metrics);
        bool take = false;
        if (w != best_w) {
            take = w > best_w;
        } else {
            const auto& a = records[i].metrics;
            const auto& b = records[best].metrics;
            if (a.customer_cost != b.customer_cost)
                take = a.customer_cost < b.customer_cost;
            else if (a.emission_cost != b.emission_cost)
                take = a.emission_cost < b.emission_cost;
            else
                take = records[i].profile < records[best].profile;
        }
        if (take) {
            best = i;
            best_w = w;
        }
    }
    return best;
}

inline const EquilibriumRecord& select_welfare(const std::vector<EquilibriumRecord>& records,
                                               const WelfareWeights& weights) {
    return records[select_welfare_index(records, weights)];
}

// Memoizing wrapper so expensive oracles are consulted once per profile.
// Thread-safe use requires external locking; pipelines shard work so each
// profile is evaluated by exactly one thread before any shared reads.
template <payoff_oracle O>
class MemoizedOracle {
  public:
    explicit MemoizedOracle(O oracle) : oracle_(std::move(oracle)) {}

    ProfileEvaluation operator()(const StrategyProfile& p) const {
        auto it = memo_.find(p.indices);
        if (it != memo_.end()) return it->second;
        ProfileEvaluation ev = oracle_(p);
        memo_.emplace(p.indices, ev);
        return ev;
    }

    std::size_t size() const { return memo_.size(); }

  private:
    struct VecHash {
        std::size_t operator()(const std::vector<ActionIndex>& v) const {
            std::uint64_t h = 1469598103934665603ull; // FNV-1a
            for (ActionIndex x : v) {
                auto u = static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
                for (int b = 0; b < 4; ++b) {
                    h ^= (u >> (8 * b)) & 0xff;
                    h *= 1099511628211ull;
                }
            }
            return static_cast<std::size_t>(h);
        }
    };

    O oracle_;
    mutable std::unordered_map<std::vector<ActionIndex>, ProfileEvaluation, VecHash> memo_;
};

} // namespace mobeq
