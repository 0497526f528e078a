#pragma once

#include <atomic>
#include <limits>
#include <optional>
#include <thread>

#include "../congestion/equilibrium.hpp"
#include "../core/nash.hpp"
#include "../network/evaluate.hpp"
#include "cache.hpp"
#include "results.hpp"

// End-to-end sweep drivers. The network pipeline evaluates the full action
// product (optionally across threads and through a persistent cache), then
// enumerates follower equilibria per leader action and reports one row per
// equilibrium. Output is deterministic: rows are assembled in canonical order
// (leader ascending, follower tuples lexicographic) no matter how the
// evaluations were scheduled, so two runs of the same scenario produce
// byte-identical tables.

namespace mobeq {

struct PipelineOptions {
    int threads = 1;
    QpOptions qp;
    NashOptions nash;
    NeSelection selection = NeSelection::optimistic;
    std::string cache_path; // empty: no cache
};

struct ProfileFailure {
    StrategyProfile profile;
    std::string label;
    std::string message;
};

struct PipelineResult {
    ResultsTable table;
    std::vector<ProfileFailure> failures;
    std::size_t profile_count = 0;
    std::size_t cache_hits = 0;
    std::size_t rational_count = 0;
    std::optional<std::size_t> selected_row; // row index into table
};

// Content hash of everything that determines a profile evaluation. Cache keys
// are per-profile indices, so the fingerprint must pin the scenario, the
// action grids (order included), and the solver settings.
inline std::string network_fingerprint(const NetworkScenario& scenario,
                                       const ActionCatalog& catalog, const QpOptions& qp) {
    Fingerprint fp;
    fp.add("network-v1");
    fp.add(static_cast<long long>(scenario.graph.vertex_count));
    fp.add(static_cast<long long>(scenario.graph.arcs.size()));
    for (const Arc& a : scenario.graph.arcs) {
        fp.add(static_cast<long long>(a.source));
        fp.add(static_cast<long long>(a.target));
        fp.add(mode_name(a.mode));
        fp.add(a.length_miles);
        fp.add(a.time_hours);
        fp.add(a.pt_line);
    }
    fp.add(static_cast<long long>(scenario.demands.size()));
    for (const Demand& d : scenario.demands) {
        fp.add(static_cast<long long>(d.origin));
        fp.add(static_cast<long long>(d.destination));
        fp.add(d.rate);
    }
    const CostTables& t = scenario.tables;
    for (const auto& rows : t.vehicle_rows)
        for (const VehicleCostRow& r : rows) {
            fp.add(r.operational_usd_per_mile);
            fp.add(r.fixed_usd);
            fp.add(r.emissions_kg_per_mile);
        }
    fp.add(t.vehicle_life_miles);
    for (int i = 0; i < 2; ++i) {
        fp.add(t.mm_cost_usd_per_mile[i]);
        fp.add(t.mm_speed_mph[i]);
        fp.add(t.mm_emissions_kg_per_mile[i]);
    }
    for (double w : t.pt_wait_minutes) fp.add(w);
    fp.add(t.co2_price_usd_per_kg);
    fp.add(t.amod_wait_hours);
    fp.add(t.walk_speed_mph);
    fp.add(t.congestion_factor);
    fp.add(scenario.vot.lower);
    fp.add(scenario.vot.upper);
    fp.add(scenario.weights.customer_cost);
    fp.add(scenario.weights.emission_cost);
    fp.add(scenario.weights.public_revenue);

    fp.add(static_cast<long long>(catalog.municipality.size()));
    for (const auto& a : catalog.municipality) {
        fp.add(a.pt_short_price);
        fp.add(a.pt_long_price);
        fp.add(a.cutoff_miles);
        fp.add(a.mile_tax);
        fp.add(a.empty_tax_multiplier);
    }
    fp.add(static_cast<long long>(catalog.amod.size()));
    for (const auto& a : catalog.amod) {
        fp.add(engine_name(a.engine));
        fp.add(automation_name(a.automation));
        fp.add(a.fleet_size);
    }
    fp.add(static_cast<long long>(catalog.mm.size()));
    for (const auto& a : catalog.mm) {
        fp.add(mm_vehicle_name(a.vehicle));
        fp.add(a.base_price);
        fp.add(a.variable_price);
    }
    fp.add(static_cast<long long>(catalog.taxi.size()));
    for (const auto& a : catalog.taxi) {
        fp.add(a.base_price);
        fp.add(a.variable_price);
    }
    fp.add(qp.tolerance);
    fp.add(static_cast<long long>(qp.max_iterations));
    fp.add(static_cast<long long>(qp.polish ? 1 : 0));
    return fp.hex();
}

namespace io_detail {

struct EvalSlot {
    bool failed = false;
    std::string error;
    ProfileEvaluation evaluation;
    double amod_share = 0.0;
};

inline std::string profile_key(int l, int a, int m, int t) {
    return std::to_string(l) + "/" + std::to_string(a) + "/" + std::to_string(m) + "/" +
           std::to_string(t);
}

} // namespace io_detail

// Full sweep of the city game. Evaluates every profile (threaded, cached),
// enumerates the follower equilibria induced by each leader action, and
// returns one table row per equilibrium with the action parameters spelled
// out, the money flows, the Pareto ("rational") flag, and the single row the
// leader would induce under the configured selection policy.
inline PipelineResult run_network_pipeline(const NetworkScenario& scenario,
                                           const ActionCatalog& catalog,
                                           const PipelineOptions& options = {}) {
    if (options.threads < 1) throw std::invalid_argument("pipeline threads must be >= 1");
    const PreparedNetwork net = prepare_network(scenario);
    const auto spaces = action_spaces(catalog);

    const std::size_t L = catalog.municipality.size();
    const std::size_t A = catalog.amod.size();
    const std::size_t M = catalog.mm.size();
    const std::size_t T = catalog.taxi.size();
    const std::size_t total = L * A * M * T;

    EvalCache cache;
    if (!options.cache_path.empty())
        cache.open(options.cache_path, network_fingerprint(scenario, catalog, options.qp));

    PipelineResult result;
    result.profile_count = total;

    std::vector<io_detail::EvalSlot> slots(total);
    std::atomic<std::size_t> cache_hits{0};
    auto evaluate_one = [&](std::size_t linear) {
        const int t = static_cast<int>(linear % T);
        const int m = static_cast<int>((linear / T) % M);
        const int a = static_cast<int>((linear / (T * M)) % A);
        const int l = static_cast<int>(linear / (T * M * A));
        const std::string key = io_detail::profile_key(l, a, m, t);
        io_detail::EvalSlot& slot = slots[linear];
        if (auto hit = cache.lookup(key)) {
            slot.failed = hit->failed;
            slot.error = hit->error;
            slot.evaluation.payoffs = hit->payoffs;
            slot.evaluation.metrics = hit->metrics;
            slot.amod_share = hit->amod_share;
            cache_hits.fetch_add(1, std::memory_order_relaxed);
            return;
        }
        try {
            const NetworkEvaluation ev = evaluate_profile(
                net, catalog.municipality[static_cast<std::size_t>(l)],
                catalog.amod[static_cast<std::size_t>(a)], catalog.mm[static_cast<std::size_t>(m)],
                catalog.taxi[static_cast<std::size_t>(t)], options.qp);
            slot.evaluation = ev.evaluation;
            slot.amod_share = ev.amod_share;
        } catch (const std::exception& e) {
            slot.failed = true;
            slot.error = e.what();
        }
        CachedEvaluation entry;
        entry.failed = slot.failed;
        entry.error = slot.error;
        entry.payoffs = slot.evaluation.payoffs;
        entry.metrics = slot.evaluation.metrics;
        entry.amod_share = slot.amod_share;
        cache.store(key, entry);
    };

    if (options.threads == 1 || total <= 1) {
        for (std::size_t i = 0; i < total; ++i) evaluate_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= total) break;
                evaluate_one(i);
            }
        };
        const std::size_t n =
            std::min<std::size_t>(static_cast<std::size_t>(options.threads), total);
        std::vector<std::thread> pool;
        pool.reserve(n);
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    result.cache_hits = cache_hits.load();

    for (std::size_t linear = 0; linear < total; ++linear) {
        const io_detail::EvalSlot& slot = slots[linear];
        if (!slot.failed) continue;
        const int t = static_cast<int>(linear % T);
        const int m = static_cast<int>((linear / T) % M);
        const int a = static_cast<int>((linear / (T * M)) % A);
        const int l = static_cast<int>(linear / (T * M * A));
        ProfileFailure f;
        f.profile.indices = {l, a, m, t};
        f.label = catalog.municipality[static_cast<std::size_t>(l)].label() + " / " +
                  catalog.amod[static_cast<std::size_t>(a)].label() + " / " +
                  catalog.mm[static_cast<std::size_t>(m)].label() + " / " +
                  catalog.taxi[static_cast<std::size_t>(t)].label();
        f.message = slot.error;
        result.failures.push_back(std::move(f));
    }

    // Failed profiles surface as -inf payoffs: the equilibrium search then
    // never selects them and never treats them as profitable deviations.
    auto oracle = [&](const StrategyProfile& p) {
        const std::size_t linear =
            ((static_cast<std::size_t>(p.indices[0]) * A + static_cast<std::size_t>(p.indices[1])) *
                 M +
             static_cast<std::size_t>(p.indices[2])) *
                T +
            static_cast<std::size_t>(p.indices[3]);
        const io_detail::EvalSlot& slot = slots[linear];
        if (!slot.failed) return slot.evaluation;
        ProfileEvaluation bad;
        bad.payoffs.assign(4, -std::numeric_limits<double>::infinity());
        return bad;
    };

    ResultsTable& table = result.table;
    table.columns = {"profile",
                     "pt_short_price_usd",
                     "pt_long_price_usd",
                     "pt_cutoff_miles",
                     "mile_tax_usd_per_mile",
                     "empty_tax_multiplier",
                     "amod_engine",
                     "amod_automation",
                     "amod_fleet_size",
                     "mm_vehicle",
                     "mm_base_price_usd",
                     "mm_variable_price_usd_per_mile",
                     "taxi_base_price_usd",
                     "taxi_variable_price_usd_per_mile",
                     "leader_welfare_usd_per_hour",
                     "amod_profit_usd_per_hour",
                     "mm_profit_usd_per_hour",
                     "taxi_profit_usd_per_hour",
                     "customer_cost_usd_per_hour",
                     "emission_cost_usd_per_hour",
                     "public_revenue_usd_per_hour",
                     "amod_share",
                     "rational",
                     "selected"};

    const std::vector<ActionSpace> followers(spaces.begin() + 1, spaces.end());
    std::vector<EquilibriumRecord> records;
    for (ActionIndex l = 0; l < static_cast<ActionIndex>(L); ++l) {
        auto nes = enumerate_pure_nash(followers, oracle, l, options.nash);
        for (auto& p : nes) {
            EquilibriumRecord rec;
            auto ev = oracle(p);
            rec.profile = std::move(p);
            rec.payoffs = std::move(ev.payoffs);
            rec.metrics = ev.metrics;
            rec.leader_welfare = scenario.weights.welfare(rec.metrics);
            records.push_back(std::move(rec));
        }
    }

    // The induced outcome: the selection policy picks each leader action's
    // representative equilibrium, the leader takes the best representative.
    std::optional<std::size_t> selected;
    {
        std::optional<std::size_t> rep;
        ActionIndex rep_leader = -1;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const ActionIndex l = records[i].profile.leader();
            if (l != rep_leader) {
                if (rep && (!selected || detail::record_better(records[*rep], records[*selected])))
                    selected = rep;
                rep = i;
                rep_leader = l;
                continue;
            }
            const bool take = options.selection == NeSelection::optimistic
                                  ? detail::record_better(records[i], records[*rep])
                                  : detail::record_worse(records[i], records[*rep]);
            if (take) rep = i;
        }
        if (rep && (!selected || detail::record_better(records[*rep], records[*selected])))
            selected = rep;
    }
    result.selected_row = selected;

    const auto rational = dominance_filter_indices(records);
    result.rational_count = rational.size();
    std::vector<bool> is_rational(records.size(), false);
    for (std::size_t i : rational) is_rational[i] = true;

    for (std::size_t i = 0; i < records.size(); ++i) {
        const EquilibriumRecord& rec = records[i];
        const auto& idx = rec.profile.indices;
        const auto& muni = catalog.municipality[static_cast<std::size_t>(idx[0])];
        const auto& amod = catalog.amod[static_cast<std::size_t>(idx[1])];
        const auto& mm = catalog.mm[static_cast<std::size_t>(idx[2])];
        const auto& taxi = catalog.taxi[static_cast<std::size_t>(idx[3])];
        const std::size_t linear =
            ((static_cast<std::size_t>(idx[0]) * A + static_cast<std::size_t>(idx[1])) * M +
             static_cast<std::size_t>(idx[2])) *
                T +
            static_cast<std::size_t>(idx[3]);
        table.add_row({io_detail::profile_key(idx[0], idx[1], idx[2], idx[3]),
                       format_g9(muni.pt_short_price),
                       format_g9(muni.pt_long_price),
                       format_g9(muni.cutoff_miles),
                       format_g9(muni.mile_tax),
                       format_g9(muni.empty_tax_multiplier),
                       engine_name(amod.engine),
                       automation_name(amod.automation),
                       format_g9(amod.fleet_size),
                       mm_vehicle_name(mm.vehicle),
                       format_g9(mm.base_price),
                       format_g9(mm.variable_price),
                       format_g9(taxi.base_price),
                       format_g9(taxi.variable_price),
                       format_g9(rec.leader_welfare),
                       format_g9(rec.payoffs[1]),
                       format_g9(rec.payoffs[2]),
                       format_g9(rec.payoffs[3]),
                       format_g9(rec.metrics.customer_cost),
                       format_g9(rec.metrics.emission_cost),
                       format_g9(rec.metrics.public_revenue),
                       format_g9(slots[linear].amod_share),
                       is_rational[i] ? "1" : "0",
                       (selected && *selected == i) ? "1" : "0"});
    }
    return result;
}

// Grid sweep of the analytic game: each leader price is paired with every
// provider's best response and scored. One row per grid point; rational and
// selected flags work as in the network sweep.
inline PipelineResult run_congestion_pipeline(const CongestionScenario& scenario,
                                              int leader_grid_points = 101) {
    scenario.validate();
    if (leader_grid_points < 1)
        throw std::invalid_argument("congestion sweep needs at least one grid point");

    std::vector<double> grid;
    if (leader_grid_points == 1) {
        grid.push_back(scenario.pt.price);
    } else {
        for (int i = 0; i < leader_grid_points; ++i)
            grid.push_back(scenario.pt.price_cap * i / (leader_grid_points - 1));
    }

    const std::size_t J = scenario.msps.size();
    PipelineResult result;
    result.profile_count = grid.size();

    ResultsTable& table = result.table;
    table.columns = {"profile", "pt_price_usd"};
    for (std::size_t j = 0; j < J; ++j) {
        table.columns.push_back("provider" + std::to_string(j + 1) + "_price_usd");
        table.columns.push_back("provider" + std::to_string(j + 1) + "_fleet");
    }
    table.columns.push_back("leader_welfare_usd");
    for (std::size_t j = 0; j < J; ++j)
        table.columns.push_back("provider" + std::to_string(j + 1) + "_profit_usd");
    table.columns.insert(table.columns.end(),
                         {"customer_cost_usd", "emission_cost_usd", "public_revenue_usd",
                          "rational", "selected"});

    std::vector<EquilibriumRecord> records;
    std::vector<std::vector<std::string>> cells; // action+outcome prefix per record
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double p0 = grid[i];
        try {
            std::vector<MspStrategy> strategies;
            strategies.reserve(J);
            for (std::size_t j = 0; j < J; ++j)
                strategies.push_back(best_response(scenario, j, p0));
            const CongestionOutcome outcome = social_welfare(scenario, p0, strategies);

            EquilibriumRecord rec;
            rec.profile.indices = {static_cast<ActionIndex>(i)};
            rec.payoffs.push_back(outcome.welfare);
            rec.payoffs.insert(rec.payoffs.end(), outcome.profits.begin(),
                               outcome.profits.end());
            rec.metrics = outcome.metrics;
            rec.leader_welfare = outcome.welfare;

            std::vector<std::string> row{std::to_string(i), format_g9(p0)};
            for (const MspStrategy& s : strategies) {
                row.push_back(format_g9(s.price));
                row.push_back(format_g9(s.fleet));
            }
            row.push_back(format_g9(outcome.welfare));
            for (double profit : outcome.profits) row.push_back(format_g9(profit));
            row.push_back(format_g9(outcome.metrics.customer_cost));
            row.push_back(format_g9(outcome.metrics.emission_cost));
            row.push_back(format_g9(outcome.metrics.public_revenue));
            records.push_back(std::move(rec));
            cells.push_back(std::move(row));
        } catch (const std::exception& e) {
            ProfileFailure f;
            f.profile.indices = {static_cast<ActionIndex>(i)};
            f.label = "pt_price=" + format_g9(p0);
            f.message = e.what();
            result.failures.push_back(std::move(f));
        }
    }

    std::optional<std::size_t> selected;
    if (!records.empty()) selected = select_welfare_index(records, scenario.weights);
    result.selected_row = selected;

    const auto rational = dominance_filter_indices(records);
    result.rational_count = rational.size();
    std::vector<bool> is_rational(records.size(), false);
    for (std::size_t i : rational) is_rational[i] = true;

    for (std::size_t i = 0; i < records.size(); ++i) {
        std::vector<std::string> row = std::move(cells[i]);
        row.push_back(is_rational[i] ? "1" : "0");
        row.push_back((selected && *selected == i) ? "1" : "0");
        table.add_row(std::move(row));
    }
    return result;
}

} // namespace mobeq
