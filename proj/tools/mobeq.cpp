#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <mobeq/io/pipeline.hpp>
#include <mobeq/io/scenario.hpp>

// Command-line front end. CSV goes to stdout (or --out); progress and
// summaries go to stderr so the data stream stays clean for piping.
// Exit codes: 0 success, 2 bad input (arguments or scenario), 3 solver
// failure in a single-answer command.

namespace {

using namespace mobeq;

void emit(const ResultsTable& table, const std::string& out_path) {
    if (out_path.empty())
        std::cout << to_csv(table);
    else
        save_results(table, out_path);
}

struct SweepFlags {
    std::string scenario;
    std::string out;
    int threads = 0;        // 0: use the scenario's setting
    double tolerance = 0.0; // 0: use the scenario's setting
    std::string cache;
    bool pessimistic = false;
    long long seed = 0;
};

void add_sweep_flags(CLI::App* cmd, SweepFlags& f, bool network_extras) {
    cmd->add_option("--scenario", f.scenario, "scenario file (json)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "write csv to this file instead of stdout");
    if (network_extras) {
        cmd->add_option("--threads", f.threads,
                        "evaluation worker threads (default: scenario setting)");
        cmd->add_option("--cache", f.cache,
                        "evaluation cache file (default: scenario setting)");
        cmd->add_flag("--pessimistic", f.pessimistic,
                      "assume followers settle on the equilibrium the leader likes least");
    }
    cmd->add_option("--tolerance", f.tolerance, "solver tolerance (default: scenario setting)");
    cmd->add_option("--seed", f.seed, "reserved; all solvers here are deterministic");
}

PipelineOptions pipeline_options(const NetworkSetup& setup, const SweepFlags& f) {
    PipelineOptions options;
    options.threads = f.threads > 0 ? f.threads : setup.threads;
    options.qp.tolerance = f.tolerance > 0.0 ? f.tolerance : setup.qp_tolerance;
    options.cache_path = f.cache.empty() ? setup.cache_file : f.cache;
    options.selection = f.pessimistic ? NeSelection::pessimistic : NeSelection::optimistic;
    return options;
}

void print_failures(const PipelineResult& result) {
    const std::size_t shown = std::min<std::size_t>(result.failures.size(), 5);
    for (std::size_t i = 0; i < shown; ++i)
        std::fprintf(stderr, "  failed: %s: %s\n", result.failures[i].label.c_str(),
                     result.failures[i].message.c_str());
    if (result.failures.size() > shown)
        std::fprintf(stderr, "  ... and %zu more failures\n", result.failures.size() - shown);
}

PipelineResult run_loaded_sweep(const LoadedScenario& loaded, const SweepFlags& flags) {
    if (loaded.kind == ModelKind::congestion) {
        const PipelineResult result = run_congestion_pipeline(
            loaded.congestion.scenario, loaded.congestion.leader_grid_points);
        std::fprintf(stderr, "%zu grid points, %zu rows (%zu rational), %zu failures\n",
                     result.profile_count, result.table.rows.size(), result.rational_count,
                     result.failures.size());
        print_failures(result);
        return result;
    }
    const PipelineOptions options = pipeline_options(loaded.network, flags);
    const PipelineResult result =
        run_network_pipeline(loaded.network.scenario, loaded.network.catalog, options);
    std::fprintf(stderr,
                 "%zu profiles evaluated (%zu from cache), %zu equilibrium rows "
                 "(%zu rational), %zu failures\n",
                 result.profile_count, result.cache_hits, result.table.rows.size(),
                 result.rational_count, result.failures.size());
    print_failures(result);
    return result;
}

int run_sweep(const SweepFlags& flags) {
    const LoadedScenario loaded = load_scenario(flags.scenario);
    const PipelineResult result = run_loaded_sweep(loaded, flags);
    emit(result.table, flags.out);
    return 0;
}

int run_solve_network(const SweepFlags& flags) {
    const LoadedScenario loaded = load_scenario(flags.scenario);
    if (loaded.kind != ModelKind::network)
        throw std::invalid_argument("'" + flags.scenario +
                                    "' is not a network scenario; use solve-congestion");
    const PipelineResult result = run_loaded_sweep(loaded, flags);
    if (!result.selected_row) {
        std::fprintf(stderr, "error: no profile admits a follower equilibrium\n");
        return 3;
    }
    ResultsTable selected;
    selected.columns = result.table.columns;
    selected.add_row(result.table.rows[*result.selected_row]);
    std::fprintf(stderr, "selected profile %s with welfare %s $/h\n",
                 selected.cell(0, "profile").c_str(),
                 selected.cell(0, "leader_welfare_usd_per_hour").c_str());
    emit(selected, flags.out);
    return 0;
}

int run_solve_congestion(const SweepFlags& flags) {
    const LoadedScenario loaded = load_scenario(flags.scenario);
    if (loaded.kind != ModelKind::congestion)
        throw std::invalid_argument("'" + flags.scenario +
                                    "' is not an analytic-game scenario; use solve-network");
    const CongestionScenario& s = loaded.congestion.scenario;
    StackelbergOptions options;
    if (flags.tolerance > 0.0) options.price_tolerance = flags.tolerance;
    const CongestionEquilibrium eq = solve_stackelberg(s, options);

    ResultsTable table;
    table.columns = {"pt_price_usd"};
    for (std::size_t j = 0; j < s.msps.size(); ++j) {
        table.columns.push_back("provider" + std::to_string(j + 1) + "_price_usd");
        table.columns.push_back("provider" + std::to_string(j + 1) + "_fleet");
    }
    table.columns.push_back("leader_welfare_usd");
    for (std::size_t j = 0; j < s.msps.size(); ++j)
        table.columns.push_back("provider" + std::to_string(j + 1) + "_profit_usd");
    table.columns.insert(table.columns.end(),
                         {"customer_cost_usd", "emission_cost_usd", "public_revenue_usd"});
    std::vector<std::string> row{format_g9(eq.leader_price)};
    for (const MspStrategy& st : eq.strategies) {
        row.push_back(format_g9(st.price));
        row.push_back(format_g9(st.fleet));
    }
    row.push_back(format_g9(eq.outcome.welfare));
    for (double profit : eq.outcome.profits) row.push_back(format_g9(profit));
    row.push_back(format_g9(eq.outcome.metrics.customer_cost));
    row.push_back(format_g9(eq.outcome.metrics.emission_cost));
    row.push_back(format_g9(eq.outcome.metrics.public_revenue));
    table.add_row(std::move(row));

    std::fprintf(stderr, "optimal pt price %s, welfare %s\n", format_g9(eq.leader_price).c_str(),
                 format_g9(eq.outcome.welfare).c_str());
    emit(table, flags.out);
    return 0;
}

int run_filter_rational(const std::string& input, const std::string& out) {
    const ResultsTable table = load_results(input);
    const std::size_t col = table.column_index("rational");
    ResultsTable kept;
    kept.columns = table.columns;
    for (const auto& row : table.rows)
        if (row[col] == "1") kept.rows.push_back(row);
    std::fprintf(stderr, "kept %zu of %zu rows\n", kept.rows.size(), table.rows.size());
    emit(kept, out);
    return 0;
}

// Re-scalarizes an existing sweep: recomputes the welfare column under the
// given weights and moves the selected flag to the new optimum. Dominance
// ("rational") is weight-free, so that column is left alone.
int run_select(const std::string& input, const std::string& out, double k1, double k2,
               double k3) {
    const WelfareWeights weights{k1, k2, k3};
    weights.validate();
    ResultsTable table = load_results(input);

    auto metric_column = [&](const char* hourly, const char* flat) {
        for (std::size_t i = 0; i < table.columns.size(); ++i)
            if (table.columns[i] == hourly || table.columns[i] == flat) return i;
        throw std::invalid_argument("results csv lacks a '" + std::string(flat) + "' or '" +
                                    hourly + "' column");
    };
    const std::size_t c_cost = metric_column("customer_cost_usd_per_hour", "customer_cost_usd");
    const std::size_t c_emis = metric_column("emission_cost_usd_per_hour", "emission_cost_usd");
    const std::size_t c_rev =
        metric_column("public_revenue_usd_per_hour", "public_revenue_usd");
    const std::size_t c_welfare =
        metric_column("leader_welfare_usd_per_hour", "leader_welfare_usd");
    const std::size_t c_selected = table.column_index("selected");
    const std::size_t c_profile = table.column_index("profile");
    if (table.rows.empty()) throw std::invalid_argument("results csv has no rows");

    std::vector<EquilibriumRecord> records(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        EquilibriumRecord& rec = records[r];
        rec.metrics.customer_cost = parse_number(table.rows[r][c_cost]);
        rec.metrics.emission_cost = parse_number(table.rows[r][c_emis]);
        rec.metrics.public_revenue = parse_number(table.rows[r][c_rev]);
        rec.leader_welfare = weights.welfare(rec.metrics);
        // Profile indices drive the deterministic tie-break.
        const std::string& key = table.rows[r][c_profile];
        std::size_t pos = 0;
        try {
            while (pos < key.size()) {
                std::size_t used = 0;
                rec.profile.indices.push_back(std::stoi(key.substr(pos), &used));
                pos += used;
                if (pos < key.size() && key[pos] == '/') ++pos;
            }
        } catch (const std::exception&) {
            rec.profile.indices = {static_cast<ActionIndex>(r)};
        }
    }
    const std::size_t best = select_welfare_index(records, weights);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        table.rows[r][c_welfare] = format_g9(records[r].leader_welfare);
        table.rows[r][c_selected] = (r == best) ? "1" : "0";
    }
    std::fprintf(stderr, "selected row %zu (profile %s) with welfare %s\n", best,
                 table.rows[best][c_profile].c_str(), format_g9(records[best].leader_welfare).c_str());
    emit(table, out);
    return 0;
}

int run_export_plot(const std::string& input, const std::string& out,
                    const std::vector<std::string>& axes, const std::string& classify,
                    double scale) {
    const ResultsTable table = load_results(input);
    PlotSelection selection;
    selection.axes = axes;
    selection.classification = classify;
    selection.metric_scale = scale;
    const ResultsTable plot = export_plot_data(table, selection);
    std::fprintf(stderr, "%zu rows exported\n", plot.rows.size());
    emit(plot, out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stackelberg mobility game toolkit: sweeps the municipality/provider "
                 "action space of a scenario and reports follower equilibria"};
    app.require_subcommand(1);

    SweepFlags sweep_flags, network_flags, congestion_flags;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "evaluate every profile and list all follower equilibria as csv");
    sweep->alias("enumerate");
    add_sweep_flags(sweep, sweep_flags, true);

    CLI::App* solve_network = app.add_subcommand(
        "solve-network", "full sweep of a network scenario, report the induced equilibrium row");
    add_sweep_flags(solve_network, network_flags, true);

    CLI::App* solve_congestion = app.add_subcommand(
        "solve-congestion", "leader price optimum of an analytic congestion scenario");
    add_sweep_flags(solve_congestion, congestion_flags, false);

    std::string input, out, classify;
    double k1 = 1.0, k2 = 1.0, k3 = 1.0, scale = 100000.0;
    std::vector<std::string> axes;

    CLI::App* filter = app.add_subcommand(
        "filter-rational", "keep only the Pareto-undominated rows of a results csv");
    filter->add_option("input", input, "results csv")->required()->check(CLI::ExistingFile);
    filter->add_option("--out", out, "write csv to this file instead of stdout");

    CLI::App* select = app.add_subcommand(
        "select", "re-pick the welfare-optimal row of a results csv under new weights");
    select->add_option("input", input, "results csv")->required()->check(CLI::ExistingFile);
    select->add_option("--k1", k1, "customer cost weight (default 1)");
    select->add_option("--k2", k2, "emission cost weight (default 1)");
    select->add_option("--k3", k3, "public revenue weight (default 1)");
    select->add_option("--out", out, "write csv to this file instead of stdout");

    CLI::App* export_plot = app.add_subcommand(
        "export-plot-data", "project a results csv onto plot axes, rescaling $/h metrics");
    export_plot->add_option("input", input, "results csv")
        ->required()
        ->check(CLI::ExistingFile);
    export_plot->add_option("--axes", axes, "comma-separated column names")
        ->required()
        ->delimiter(',');
    export_plot->add_option("--classify", classify, "column copied through for coloring");
    export_plot->add_option("--scale", scale, "divisor for *_usd_per_hour axes (default 1e5)");
    export_plot->add_option("--out", out, "write csv to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sweep->parsed()) return run_sweep(sweep_flags);
        if (solve_network->parsed()) return run_solve_network(network_flags);
        if (solve_congestion->parsed()) return run_solve_congestion(congestion_flags);
        if (filter->parsed()) return run_filter_rational(input, out);
        if (select->parsed()) return run_select(input, out, k1, k2, k3);
        if (export_plot->parsed()) return run_export_plot(input, out, axes, classify, scale);
    } catch (const ScenarioError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2; // no subcommand matched (require_subcommand should prevent this)
}
