#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>

#include <mobeq/io/cache.hpp>
#include <mobeq/io/pipeline.hpp>
#include <mobeq/io/results.hpp>
#include <mobeq/io/scenario.hpp>

using namespace mobeq;

namespace {

std::filesystem::path scenario_dir() { return MOBEQ_SCENARIO_DIR; }

std::filesystem::path temp_dir() {
    const auto d = std::filesystem::temp_directory_path() / "mobeq_io_tests";
    std::filesystem::create_directories(d);
    return d;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

bool bits_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

} // namespace

TEST_CASE("nine-digit formatting round-trips") {
    const double values[] = {1.0 / 3.0, -0.0, 123456.789, 1e-7, 2.0, -17.25};
    for (double v : values) {
        const std::string s = format_g9(v);
        const double back = parse_number(s);
        CHECK(back == Catch::Approx(v).margin(1e-12).epsilon(1e-9));
        CHECK(format_g9(back) == s); // formatting is stable under re-parsing
    }
    CHECK_THROWS_AS(parse_number("12x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_number(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_number("1 2"), std::invalid_argument);
}

TEST_CASE("results tables round-trip through csv") {
    ResultsTable t;
    t.columns = {"name", "value", "note"};
    t.add_row({"plain", "1.5", "no quoting"});
    t.add_row({"com,ma", "-2", "has a comma"});
    t.add_row({"qu\"ote", "3", "line\nbreak"});

    const std::string csv = to_csv(t);
    const ResultsTable back = from_csv(csv);
    CHECK(back == t);
    CHECK(to_csv(back) == csv);

    CHECK(t.cell(1, "name") == "com,ma");
    CHECK(t.column_index("note") == 2);
    CHECK_THROWS_AS(t.column_index("missing"), std::invalid_argument);
    CHECK_THROWS_AS(t.add_row({"too", "short"}), std::invalid_argument);

    // Windows line endings parse to the same table.
    const ResultsTable crlf = from_csv("a,b\r\n1,2\r\n");
    CHECK(crlf.columns == std::vector<std::string>{"a", "b"});
    REQUIRE(crlf.rows.size() == 1);
    CHECK(crlf.rows[0] == std::vector<std::string>{"1", "2"});

    CHECK_THROWS_AS(from_csv(""), std::runtime_error);
    CHECK_THROWS_AS(from_csv("a,b\n1,2,3\n"), std::runtime_error);
    CHECK_THROWS_AS(from_csv("a,b\n\"open,2\n"), std::runtime_error);

    const auto path = temp_dir() / "roundtrip.csv";
    save_results(t, path.string());
    CHECK(load_results(path.string()) == t);
    std::filesystem::remove(path);
}

TEST_CASE("plot export rescales hourly metrics and keeps the classifier") {
    ResultsTable t;
    t.columns = {"profile", "customer_cost_usd_per_hour", "public_revenue_usd_per_hour",
                 "amod_share", "amod_fleet_size"};
    t.add_row({"0/0/0/0", "250000", "100000", "0.25", "0"});
    t.add_row({"1/0/0/0", "500000", "50000", "0", "20"});
    t.add_row({"2/0/0/0", "125000", "200000", "0.5", "60"});

    PlotSelection sel;
    sel.axes = {"customer_cost_usd_per_hour", "amod_share"};
    sel.classification = "amod_fleet_size";

    const ResultsTable plot = export_plot_data(t, sel);
    REQUIRE(plot.columns.size() == 3);
    CHECK(plot.columns[0] == "customer_cost_100000usd_per_hour");
    CHECK(plot.columns[1] == "amod_share"); // not an hourly-dollar column
    CHECK(plot.columns[2] == "amod_fleet_size");
    REQUIRE(plot.rows.size() == 3);
    CHECK(plot.rows[0] == std::vector<std::string>{"2.5", "0.25", "0"});
    CHECK(plot.rows[1] == std::vector<std::string>{"5", "0", "20"});
    CHECK(plot.rows[2] == std::vector<std::string>{"1.25", "0.5", "60"});

    PlotSelection unscaled = sel;
    unscaled.metric_scale = 1.0;
    const ResultsTable raw = export_plot_data(t, unscaled);
    CHECK(raw.columns[0] == "customer_cost_usd_per_hour");
    CHECK(raw.rows[1][0] == "500000");

    PlotSelection bad = sel;
    bad.axes = {"customer_cost_usd_per_hour", "nope"};
    CHECK_THROWS_WITH(export_plot_data(t, bad), Catch::Matchers::ContainsSubstring("nope"));
    bad = sel;
    bad.axes.clear();
    CHECK_THROWS_AS(export_plot_data(t, bad), std::invalid_argument);
    bad = sel;
    bad.metric_scale = 0.0;
    CHECK_THROWS_AS(export_plot_data(t, bad), std::invalid_argument);
    ResultsTable empty;
    empty.columns = t.columns;
    CHECK_THROWS_AS(export_plot_data(empty, sel), std::invalid_argument);
}

TEST_CASE("scenario loader reads the bundled fixtures") {
    SECTION("analytic game") {
        const auto loaded = load_scenario((scenario_dir() / "congestion_canonical.json").string());
        REQUIRE(loaded.kind == ModelKind::congestion);
        const CongestionScenario& s = loaded.congestion.scenario;
        CHECK(s.value_of_time == 1.0);
        CHECK(s.pt.price == 0.7);
        CHECK(s.pt.base_time == 2.0);
        CHECK(s.pt.price_cap == 1.0);
        CHECK(s.weights.customer_cost == 0.0);
        CHECK(s.weights.public_revenue == 1.0);
        REQUIRE(s.msps.size() == 1);
        CHECK(s.msps[0].name == "msp1");
        CHECK(s.msps[0].trip_cost == 0.2);
        CHECK(s.msps[0].congestion.affine_intercept() == 0.5);
        CHECK(s.msps[0].congestion.affine_slope() == 3.0);
        CHECK(loaded.congestion.leader_grid_points == 101);
    }
    SECTION("six-node ring") {
        const auto loaded = load_scenario((scenario_dir() / "berlin_mini.json").string());
        REQUIRE(loaded.kind == ModelKind::network);
        const NetworkSetup& n = loaded.network;
        CHECK(n.scenario.graph.vertex_count == 6);
        CHECK(n.scenario.graph.arcs.size() == 56);
        CHECK(n.scenario.demands.size() == 3);
        CHECK(n.scenario.tables.co2_price_usd_per_kg == 0.10);
        CHECK(n.scenario.vot.lower == 10.0);
        CHECK(n.scenario.vot.upper == 17.0);
        CHECK(n.catalog.municipality.size() == 16);
        CHECK(n.catalog.amod.size() == 12);
        CHECK(n.catalog.mm.size() == 4);
        CHECK(n.catalog.taxi.size() == 2);
        CHECK(n.threads == 1);
        CHECK(n.qp_tolerance == 1e-9);
        CHECK(n.cache_file.empty());
    }
    SECTION("eight-node chain") {
        const auto loaded = load_scenario((scenario_dir() / "desk_sweep.json").string());
        REQUIRE(loaded.kind == ModelKind::network);
        CHECK(loaded.network.scenario.graph.vertex_count == 8);
        CHECK(loaded.network.scenario.graph.arcs.size() == 62);
        CHECK(loaded.network.scenario.demands.size() == 4);
        CHECK(loaded.network.catalog.municipality.size() == 54);
        CHECK(loaded.network.catalog.amod.size() == 12);
        CHECK(loaded.network.catalog.mm.size() == 2);
        CHECK(loaded.network.catalog.taxi.size() == 2);
    }
}

TEST_CASE("scenario loader reports every violation at once") {
    const auto dir = temp_dir();
    write_file(dir / "bad_graph.csv",
               "arc_id,source,target,mode,length_miles,time_min,line_id\n"
               "0,0,1,amod,1.0,2.0,\n"
               "1,1,0,hover,1.0,2.0,\n"
               "2,0,1,walk,1.0,x,\n"
               "3,1,0,walk,1.0,0,\n");
    write_file(dir / "bad_demands.csv",
               "origin,destination,rate\n"
               "0,1,10\n");
    write_file(dir / "bad_scenario.json", R"({
        "model": "network",
        "graph_file": "bad_graph.csv",
        "demands_file": "bad_demands.csv",
        "threads": 0,
        "qp_tolerance": 0.0,
        "misc": 1
    })");

    std::string message;
    try {
        load_scenario((dir / "bad_scenario.json").string());
        FAIL("expected a scenario error");
    } catch (const ScenarioError& e) {
        message = e.what();
    }
    CHECK(message.find("co2_price_usd_per_kg is required") != std::string::npos);
    CHECK(message.find("unknown key 'misc'") != std::string::npos);
    CHECK(message.find("threads must be >= 1") != std::string::npos);
    CHECK(message.find("qp_tolerance must be > 0") != std::string::npos);
    CHECK(message.find("line 3") != std::string::npos); // unknown mode
    CHECK(message.find("line 4") != std::string::npos); // non-numeric time
    CHECK(message.find("origin,destination,rate_per_hour") != std::string::npos);

    SECTION("analytic-game violations are also collected") {
        write_file(dir / "bad_congestion.json", R"({
            "model": "congestion",
            "providers": [
                {"trip_cost_usd": 0.2,
                 "congestion": {"kind": "affine", "zero_flow_hours": 0.5, "hours_per_flow": 0.0}},
                {"trip_cost_usd": 0.1, "congestion": {"kind": "circular"}}
            ]
        })");
        try {
            load_scenario((dir / "bad_congestion.json").string());
            FAIL("expected a scenario error");
        } catch (const ScenarioError& e) {
            message = e.what();
        }
        CHECK(message.find("scenario.pt is required") != std::string::npos);
        CHECK(message.find("beta must be > 0") != std::string::npos);
        CHECK(message.find("must be 'affine' or 'bpr'") != std::string::npos);
    }
    SECTION("non-json input and unknown models fail cleanly") {
        write_file(dir / "not_json.json", "plainly not json {");
        CHECK_THROWS_AS(load_scenario((dir / "not_json.json").string()), ScenarioError);
        CHECK_THROWS_AS(load_scenario((dir / "does_not_exist.json").string()), ScenarioError);
        write_file(dir / "bad_model.json", R"({"model": "teleport"})");
        CHECK_THROWS_WITH(load_scenario((dir / "bad_model.json").string()),
                          Catch::Matchers::ContainsSubstring("'congestion' or 'network'"));
    }
}

TEST_CASE("evaluation cache memoizes bit-exactly and survives restarts") {
    const double samples[] = {1.0 / 3.0, -0.0, 1e-300, 12345.6789, -2.5e17};
    for (double v : samples) CHECK(bits_equal(unhex_double(hex_double(v)), v));
    CHECK_THROWS_AS(unhex_double("zz"), std::invalid_argument);

    const auto path = temp_dir() / "eval.cache";
    std::filesystem::remove(path);

    CachedEvaluation good;
    good.payoffs = {-1234.5678901234567, 1.0 / 3.0, -0.0, 17.25};
    good.metrics = {1000.0 / 3.0, 2e-12, 99.999999999999};
    good.amod_share = 0.123456789012345;
    CachedEvaluation bad;
    bad.failed = true;
    bad.error = "solver gave up";

    {
        EvalCache cache;
        cache.open(path.string(), "fp-one");
        CHECK_FALSE(cache.lookup("0/0/0/0").has_value());
        cache.store("0/0/0/0", good);
        cache.store("0/0/0/1", bad);
        cache.store("0/0/0/0", good); // duplicate: ignored
        REQUIRE(cache.lookup("0/0/0/0").has_value());
    }

    // Simulate a torn final line from a killed run.
    {
        std::ofstream out(path, std::ios::app | std::ios::binary);
        out << "{\"k\":\"fp-one:0/1/";
    }

    EvalCache reopened;
    reopened.open(path.string(), "fp-one");
    CHECK(reopened.loaded() == 2);
    const auto hit = reopened.lookup("0/0/0/0");
    REQUIRE(hit.has_value());
    CHECK_FALSE(hit->failed);
    REQUIRE(hit->payoffs.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(bits_equal(hit->payoffs[i], good.payoffs[i]));
    CHECK(bits_equal(hit->metrics.customer_cost, good.metrics.customer_cost));
    CHECK(bits_equal(hit->metrics.emission_cost, good.metrics.emission_cost));
    CHECK(bits_equal(hit->metrics.public_revenue, good.metrics.public_revenue));
    CHECK(bits_equal(hit->amod_share, good.amod_share));
    const auto miss = reopened.lookup("0/0/0/1");
    REQUIRE(miss.has_value());
    CHECK(miss->failed);
    CHECK(miss->error == "solver gave up");

    // A different fingerprint must not see any of it.
    EvalCache other;
    other.open(path.string(), "fp-two");
    CHECK(other.loaded() == 0);
    CHECK_FALSE(other.lookup("0/0/0/0").has_value());
    std::filesystem::remove(path);
}

TEST_CASE("analytic-game sweep matches direct evaluation") {
    const auto loaded = load_scenario((scenario_dir() / "congestion_canonical.json").string());
    const CongestionScenario& s = loaded.congestion.scenario;

    const PipelineResult run = run_congestion_pipeline(s, loaded.congestion.leader_grid_points);
    CHECK(run.profile_count == 101);
    REQUIRE(run.table.rows.size() == 101);
    CHECK(run.failures.empty());

    // Grid placement and one mid-grid row against a direct solve.
    CHECK(run.table.cell(0, "pt_price_usd") == "0");
    CHECK(run.table.cell(100, "pt_price_usd") == "1");
    const std::size_t i = 37;
    const double p0 = parse_number(run.table.cell(i, "pt_price_usd"));
    CHECK(p0 == Catch::Approx(0.37).margin(1e-12));
    const MspStrategy direct = best_response(s, 0, p0);
    const CongestionOutcome outcome = social_welfare(s, p0, {direct});
    CHECK(run.table.cell(i, "provider1_price_usd") == format_g9(direct.price));
    CHECK(run.table.cell(i, "provider1_fleet") == format_g9(direct.fleet));
    CHECK(run.table.cell(i, "provider1_profit_usd") == format_g9(outcome.profits[0]));
    CHECK(run.table.cell(i, "leader_welfare_usd") == format_g9(outcome.welfare));
    CHECK(run.table.cell(i, "public_revenue_usd") == format_g9(outcome.metrics.public_revenue));

    // Total generalized cost equals demand times the common equilibrium cost.
    for (std::size_t r = 0; r < 101; ++r) {
        const double price = parse_number(run.table.cell(r, "pt_price_usd"));
        const double cost = parse_number(run.table.cell(r, "customer_cost_usd"));
        CHECK(cost == Catch::Approx(2.0 + price).margin(1e-9));
    }

    // Revenue rises along this grid, so the welfare maximizer is the cap and
    // every row is Pareto-undominated (cost and revenue move together).
    REQUIRE(run.selected_row.has_value());
    CHECK(*run.selected_row == 100);
    CHECK(run.table.cell(100, "selected") == "1");
    CHECK(run.rational_count == 101);
    for (std::size_t r = 0; r < 101; ++r) CHECK(run.table.cell(r, "rational") == "1");

    // Byte-identical on a rerun.
    const PipelineResult again = run_congestion_pipeline(s, loaded.congestion.leader_grid_points);
    CHECK(to_csv(again.table) == to_csv(run.table));

    SECTION("single-point sweep evaluates the configured price") {
        const PipelineResult one = run_congestion_pipeline(s, 1);
        REQUIRE(one.table.rows.size() == 1);
        CHECK(parse_number(one.table.cell(0, "pt_price_usd")) == Catch::Approx(0.7));
        CHECK(parse_number(one.table.cell(0, "provider1_price_usd")) == Catch::Approx(1.2));
        CHECK(parse_number(one.table.cell(0, "provider1_fleet")) ==
              Catch::Approx(1.0 / 3.0).margin(1e-9));
        CHECK(parse_number(one.table.cell(0, "provider1_profit_usd")) ==
              Catch::Approx(1.0 / 3.0).margin(1e-9));
        CHECK(one.selected_row == std::size_t{0});
    }
}

namespace {

// Trimmed grids on the ring fixture so sweep tests stay fast.
CatalogSets small_sets() {
    CatalogSets sets;
    sets.pt_short_prices = {0.0, 2.0};
    sets.pt_long_prices = {0.0};
    sets.cutoff_miles = {1.55};
    sets.mile_taxes = {0.0};
    sets.empty_tax_multipliers = {0.0, 1.0};
    sets.fleet_sizes = {0.0, 20.0, 60.0};
    sets.engines = {Engine::icev};
    sets.automations = {Automation::av};
    sets.mm_vehicles = {MmVehicle::es};
    sets.mm_base_prices = {1.2};
    sets.mm_variable_prices = {0.72};
    sets.taxi_base_prices = {4.72};
    sets.taxi_variable_prices = {1.17};
    return sets;
}

} // namespace

TEST_CASE("network sweep agrees with direct equilibrium enumeration") {
    const auto loaded = load_scenario((scenario_dir() / "berlin_mini.json").string());
    const NetworkScenario& scenario = loaded.network.scenario;
    const ActionCatalog catalog = make_catalog(small_sets());
    const std::size_t L = catalog.municipality.size();
    REQUIRE(L == 4);

    PipelineOptions options;
    const PipelineResult run = run_network_pipeline(scenario, catalog, options);
    CHECK(run.profile_count == 4 * 3);
    CHECK(run.failures.empty());

    // Direct evaluation of the same product space.
    const PreparedNetwork net = prepare_network(scenario);
    auto direct = [&](const StrategyProfile& p) {
        const auto ev = evaluate_profile(net, catalog.municipality[(std::size_t)p.indices[0]],
                                         catalog.amod[(std::size_t)p.indices[1]],
                                         catalog.mm[(std::size_t)p.indices[2]],
                                         catalog.taxi[(std::size_t)p.indices[3]], options.qp);
        return ev.evaluation;
    };
    const auto spaces = action_spaces(catalog);
    const std::vector<ActionSpace> followers(spaces.begin() + 1, spaces.end());

    std::size_t row = 0;
    for (ActionIndex l = 0; l < static_cast<ActionIndex>(L); ++l) {
        for (const StrategyProfile& ne : enumerate_pure_nash(followers, direct, l)) {
            REQUIRE(row < run.table.rows.size());
            const auto ev = direct(ne);
            const std::string key = std::to_string(ne.indices[0]) + "/" +
                                    std::to_string(ne.indices[1]) + "/" +
                                    std::to_string(ne.indices[2]) + "/" +
                                    std::to_string(ne.indices[3]);
            CHECK(run.table.cell(row, "profile") == key);
            CHECK(run.table.cell(row, "leader_welfare_usd_per_hour") ==
                  format_g9(scenario.weights.welfare(ev.metrics)));
            CHECK(run.table.cell(row, "amod_profit_usd_per_hour") == format_g9(ev.payoffs[1]));
            CHECK(run.table.cell(row, "mm_profit_usd_per_hour") == format_g9(ev.payoffs[2]));
            CHECK(run.table.cell(row, "taxi_profit_usd_per_hour") == format_g9(ev.payoffs[3]));
            CHECK(run.table.cell(row, "customer_cost_usd_per_hour") ==
                  format_g9(ev.metrics.customer_cost));
            ++row;
        }
    }
    CHECK(row == run.table.rows.size());
    REQUIRE(row > 0);

    // Exactly one selected row; the action columns echo the catalog entry.
    std::size_t selected_count = 0;
    for (std::size_t r = 0; r < run.table.rows.size(); ++r)
        if (run.table.cell(r, "selected") == "1") ++selected_count;
    CHECK(selected_count == 1);
    REQUIRE(run.selected_row.has_value());
    CHECK(run.table.cell(*run.selected_row, "selected") == "1");
    CHECK(run.rational_count >= 1);
    const std::size_t first = 0;
    CHECK(run.table.cell(first, "amod_engine") == "icev");
    CHECK(run.table.cell(first, "amod_automation") == "av");
    CHECK(run.table.cell(first, "mm_vehicle") == "es");
    CHECK(run.table.cell(first, "taxi_base_price_usd") == "4.72");
}

TEST_CASE("network sweep is deterministic across threads and cache reuse") {
    const auto loaded = load_scenario((scenario_dir() / "berlin_mini.json").string());
    const NetworkScenario& scenario = loaded.network.scenario;
    const ActionCatalog catalog = make_catalog(small_sets());

    PipelineOptions serial;
    const PipelineResult base = run_network_pipeline(scenario, catalog, serial);
    const std::string expected = to_csv(base.table);

    PipelineOptions threaded;
    threaded.threads = 4;
    CHECK(to_csv(run_network_pipeline(scenario, catalog, threaded).table) == expected);

    const auto cache_path = temp_dir() / "sweep.cache";
    std::filesystem::remove(cache_path);
    PipelineOptions cached;
    cached.cache_path = cache_path.string();
    const PipelineResult cold = run_network_pipeline(scenario, catalog, cached);
    CHECK(cold.cache_hits == 0);
    CHECK(to_csv(cold.table) == expected);

    cached.threads = 3;
    const PipelineResult warm = run_network_pipeline(scenario, catalog, cached);
    CHECK(warm.cache_hits == warm.profile_count);
    CHECK(to_csv(warm.table) == expected);
    std::filesystem::remove(cache_path);
}

TEST_CASE("failed evaluations are reported and excluded from equilibria") {
    const auto loaded = load_scenario((scenario_dir() / "berlin_mini.json").string());
    const NetworkScenario& scenario = loaded.network.scenario;
    CatalogSets sets = small_sets();
    sets.fleet_sizes = {0.0, 20.0};
    const ActionCatalog catalog = make_catalog(sets);

    PipelineOptions options;
    options.qp.max_iterations = 0; // every pricing solve into the wall
    options.qp.polish = false;

    const auto cache_path = temp_dir() / "failures.cache";
    std::filesystem::remove(cache_path);
    options.cache_path = cache_path.string();

    const PipelineResult run = run_network_pipeline(scenario, catalog, options);
    // One failure per (leader, fleet 20) pairing; fleet-0 profiles skip the QP.
    CHECK(run.failures.size() == 4);
    for (const ProfileFailure& f : run.failures) {
        CHECK(f.message.find("iteration-limit") != std::string::npos);
        CHECK(f.label.find("n20") != std::string::npos);
    }
    REQUIRE(!run.table.rows.empty());
    for (std::size_t r = 0; r < run.table.rows.size(); ++r)
        CHECK(run.table.cell(r, "amod_fleet_size") == "0");

    // Failures are memoized too: the warm run replays them from the cache.
    const PipelineResult warm = run_network_pipeline(scenario, catalog, options);
    CHECK(warm.cache_hits == warm.profile_count);
    CHECK(warm.failures.size() == 4);
    CHECK(to_csv(warm.table) == to_csv(run.table));
    std::filesystem::remove(cache_path);
}
