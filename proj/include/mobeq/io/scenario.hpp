#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../congestion/model.hpp"
#include "../network/actions.hpp"
#include "../network/evaluate.hpp"

// Scenario files: one JSON document per run, with units spelled out in the
// key names. Network scenarios reference two delimited side files (arc list
// and demand list) kept deliberately hand-editable. Validation is collected,
// not fail-fast: a broken scenario reports every violation at once.

namespace mobeq {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace io_detail {

struct Violations {
    std::vector<std::string> items;

    void add(std::string message) { items.push_back(std::move(message)); }
    bool ok() const { return items.empty(); }

    void raise(const std::string& path) const {
        if (items.empty()) return;
        std::string msg = "scenario '" + path + "' is invalid:";
        for (const std::string& item : items) msg += "\n  - " + item;
        throw ScenarioError(msg);
    }
};

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot read file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& where, Violations& v) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known) v.add(where + ": unknown key '" + item.key() + "'");
    }
}

inline double get_number(const nlohmann::json& j, const char* key, double fallback,
                         const std::string& where, Violations& v) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) {
        v.add(where + "." + key + " must be a number");
        return fallback;
    }
    return j[key].get<double>();
}

inline std::optional<double> get_required_number(const nlohmann::json& j, const char* key,
                                                 const std::string& where, Violations& v) {
    if (!j.contains(key)) {
        v.add(where + "." + key + " is required");
        return std::nullopt;
    }
    if (!j[key].is_number()) {
        v.add(where + "." + key + " must be a number");
        return std::nullopt;
    }
    return j[key].get<double>();
}

inline int get_int(const nlohmann::json& j, const char* key, int fallback,
                   const std::string& where, Violations& v) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) {
        v.add(where + "." + key + " must be an integer");
        return fallback;
    }
    return j[key].get<int>();
}

inline std::optional<std::string> get_string(const nlohmann::json& j, const char* key,
                                             const std::string& where, Violations& v,
                                             bool required) {
    if (!j.contains(key)) {
        if (required) v.add(where + "." + key + " is required");
        return std::nullopt;
    }
    if (!j[key].is_string()) {
        v.add(where + "." + key + " must be a string");
        return std::nullopt;
    }
    return j[key].get<std::string>();
}

inline std::vector<double> get_number_list(const nlohmann::json& j, const char* key,
                                           std::vector<double> fallback, const std::string& where,
                                           Violations& v) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_array()) {
        v.add(where + "." + key + " must be an array of numbers");
        return fallback;
    }
    std::vector<double> out;
    for (const auto& item : j[key]) {
        if (!item.is_number()) {
            v.add(where + "." + key + " must contain only numbers");
            return fallback;
        }
        out.push_back(item.get<double>());
    }
    return out;
}

inline WelfareWeights get_weights(const nlohmann::json& j, const std::string& where,
                                  Violations& v) {
    WelfareWeights w{1.0, 1.0, 1.0};
    if (!j.contains("weights")) return w;
    const auto& jw = j["weights"];
    if (!jw.is_object()) {
        v.add(where + ".weights must be an object");
        return w;
    }
    check_keys(jw, {"customer_cost", "emission_cost", "public_revenue"}, where + ".weights", v);
    w.customer_cost = get_number(jw, "customer_cost", 1.0, where + ".weights", v);
    w.emission_cost = get_number(jw, "emission_cost", 1.0, where + ".weights", v);
    w.public_revenue = get_number(jw, "public_revenue", 1.0, where + ".weights", v);
    return w;
}

// Splits one delimited line on commas and trims surrounding blanks.
inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (std::string& f : fields) {
        const auto b = f.find_first_not_of(" \t\r");
        const auto e = f.find_last_not_of(" \t\r");
        f = (b == std::string::npos) ? std::string() : f.substr(b, e - b + 1);
    }
    return fields;
}

inline std::optional<double> parse_field_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<int> parse_field_int(const std::string& s) {
    const auto v = parse_field_number(s);
    if (!v || *v != std::floor(*v) || std::abs(*v) > 1e9) return std::nullopt;
    return static_cast<int>(*v);
}

} // namespace io_detail

// Arc list: header "arc_id,source,target,mode,length_miles,time_min,line_id",
// then one arc per line. Blank lines and '#' comments are skipped; arc ids
// must be exactly 0..n-1 (any order) and define the canonical arc order.
inline MobilityMultigraph load_graph_file(const std::string& path, io_detail::Violations& v) {
    MobilityMultigraph graph;
    std::string text;
    try {
        text = io_detail::read_text_file(path);
    } catch (const ScenarioError& e) {
        v.add(e.what());
        return graph;
    }
    const std::string where = "graph '" + path + "'";
    static const std::vector<std::string> header = {"arc_id",       "source",   "target", "mode",
                                                    "length_miles", "time_min", "line_id"};
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    std::vector<std::pair<int, Arc>> parsed;
    int max_vertex = -1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto fields = io_detail::split_fields(line);
        const std::string at = where + " line " + std::to_string(line_no);
        if (!saw_header) {
            if (fields != header)
                v.add(at + ": expected header 'arc_id,source,target,mode,length_miles,"
                           "time_min,line_id'");
            saw_header = true;
            continue;
        }
        if (fields.size() != header.size()) {
            v.add(at + ": expected " + std::to_string(header.size()) + " fields, got " +
                  std::to_string(fields.size()));
            continue;
        }
        const auto id = io_detail::parse_field_int(fields[0]);
        const auto src = io_detail::parse_field_int(fields[1]);
        const auto dst = io_detail::parse_field_int(fields[2]);
        const auto len = io_detail::parse_field_number(fields[4]);
        const auto minutes = io_detail::parse_field_number(fields[5]);
        if (!id || !src || !dst || !len || !minutes) {
            v.add(at + ": arc_id/source/target/length_miles/time_min must be numeric");
            continue;
        }
        Arc arc;
        arc.source = *src;
        arc.target = *dst;
        try {
            arc.mode = parse_mode(fields[3]);
        } catch (const std::invalid_argument& e) {
            v.add(at + ": " + e.what());
            continue;
        }
        arc.length_miles = *len;
        arc.time_hours = *minutes / 60.0;
        arc.pt_line = fields[6];
        if (arc.mode != Mode::pt && !arc.pt_line.empty()) {
            v.add(at + ": line_id must be empty for non-pt arcs");
            continue;
        }
        parsed.emplace_back(*id, std::move(arc));
        max_vertex = std::max({max_vertex, *src, *dst});
    }
    if (!saw_header) v.add(where + ": empty file");

    graph.vertex_count = max_vertex + 1;
    graph.arcs.resize(parsed.size());
    std::vector<bool> seen(parsed.size(), false);
    for (auto& [id, arc] : parsed) {
        if (id < 0 || id >= static_cast<int>(parsed.size()) || seen[static_cast<std::size_t>(id)]) {
            v.add(where + ": arc ids must be unique and cover 0.." +
                  std::to_string(parsed.size() - 1) + " (offending id " + std::to_string(id) + ")");
            return graph;
        }
        seen[static_cast<std::size_t>(id)] = true;
        graph.arcs[static_cast<std::size_t>(id)] = std::move(arc);
    }
    if (!parsed.empty()) {
        try {
            graph.validate();
        } catch (const std::invalid_argument& e) {
            v.add(where + ": " + e.what());
        }
    }
    return graph;
}

// Demand list: header "origin,destination,rate_per_hour", one demand per line.
inline std::vector<Demand> load_demands_file(const std::string& path, int vertex_count,
                                             io_detail::Violations& v) {
    std::vector<Demand> demands;
    std::string text;
    try {
        text = io_detail::read_text_file(path);
    } catch (const ScenarioError& e) {
        v.add(e.what());
        return demands;
    }
    const std::string where = "demands '" + path + "'";
    static const std::vector<std::string> header = {"origin", "destination", "rate_per_hour"};
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto fields = io_detail::split_fields(line);
        const std::string at = where + " line " + std::to_string(line_no);
        if (!saw_header) {
            if (fields != header)
                v.add(at + ": expected header 'origin,destination,rate_per_hour'");
            saw_header = true;
            continue;
        }
        if (fields.size() != header.size()) {
            v.add(at + ": expected 3 fields, got " + std::to_string(fields.size()));
            continue;
        }
        const auto o = io_detail::parse_field_int(fields[0]);
        const auto d = io_detail::parse_field_int(fields[1]);
        const auto r = io_detail::parse_field_number(fields[2]);
        if (!o || !d || !r) {
            v.add(at + ": all fields must be numeric");
            continue;
        }
        Demand demand{*o, *d, *r};
        try {
            demand.validate(vertex_count);
        } catch (const std::invalid_argument& e) {
            v.add(at + ": " + e.what());
            continue;
        }
        demands.push_back(demand);
    }
    if (!saw_header) v.add(where + ": empty file");
    if (saw_header && demands.empty()) v.add(where + ": no demands");
    return demands;
}

enum class ModelKind { congestion, network };

struct CongestionSetup {
    CongestionScenario scenario;
    int leader_grid_points = 101;
};

struct NetworkSetup {
    NetworkScenario scenario;
    CatalogSets sets;
    ActionCatalog catalog;
    int threads = 1;
    double qp_tolerance = 1e-9;
    std::string cache_file; // empty: no cache
};

struct LoadedScenario {
    ModelKind kind = ModelKind::congestion;
    std::string path;
    CongestionSetup congestion;
    NetworkSetup network;
};

namespace io_detail {

inline void load_congestion(const nlohmann::json& j, CongestionSetup& setup, Violations& v) {
    check_keys(j,
               {"model", "value_of_time_usd_per_hour", "weights", "pt", "providers",
                "leader_grid_points"},
               "scenario", v);
    setup.scenario.value_of_time =
        get_number(j, "value_of_time_usd_per_hour", 1.0, "scenario", v);
    setup.scenario.weights = get_weights(j, "scenario", v);
    setup.leader_grid_points = get_int(j, "leader_grid_points", 101, "scenario", v);
    if (setup.leader_grid_points < 1) v.add("scenario.leader_grid_points must be >= 1");

    if (!j.contains("pt") || !j["pt"].is_object()) {
        v.add("scenario.pt is required and must be an object");
    } else {
        const auto& pt = j["pt"];
        check_keys(pt, {"price_usd", "base_time_hours", "price_cap_usd"}, "scenario.pt", v);
        setup.scenario.pt.price = get_number(pt, "price_usd", 0.0, "scenario.pt", v);
        setup.scenario.pt.base_time =
            get_required_number(pt, "base_time_hours", "scenario.pt", v).value_or(0.0);
        setup.scenario.pt.price_cap =
            get_required_number(pt, "price_cap_usd", "scenario.pt", v).value_or(1.0);
    }

    if (!j.contains("providers") || !j["providers"].is_array() || j["providers"].empty()) {
        v.add("scenario.providers is required and must be a non-empty array");
        return;
    }
    std::size_t idx = 0;
    for (const auto& jp : j["providers"]) {
        const std::string where = "scenario.providers[" + std::to_string(idx) + "]";
        ++idx;
        if (!jp.is_object()) {
            v.add(where + " must be an object");
            continue;
        }
        check_keys(jp,
                   {"name", "trip_cost_usd", "fleet_cost_usd", "emission_cost_usd", "congestion"},
                   where, v);
        MspParams m;
        m.name = get_string(jp, "name", where, v, false)
                     .value_or("provider" + std::to_string(idx));
        m.trip_cost = get_number(jp, "trip_cost_usd", 0.0, where, v);
        m.fleet_cost = get_number(jp, "fleet_cost_usd", 0.0, where, v);
        m.emission_rate = get_number(jp, "emission_cost_usd", 0.0, where, v);
        if (!jp.contains("congestion") || !jp["congestion"].is_object()) {
            v.add(where + ".congestion is required and must be an object");
            continue;
        }
        const auto& jc = jp["congestion"];
        const auto kind = get_string(jc, "kind", where + ".congestion", v, true);
        try {
            if (kind == std::optional<std::string>("affine")) {
                check_keys(jc, {"kind", "zero_flow_hours", "hours_per_flow"},
                           where + ".congestion", v);
                const auto a =
                    get_required_number(jc, "zero_flow_hours", where + ".congestion", v);
                const auto b =
                    get_required_number(jc, "hours_per_flow", where + ".congestion", v);
                if (a && b) m.congestion = CongestionFn::affine(*a, *b);
            } else if (kind == std::optional<std::string>("bpr")) {
                check_keys(jc, {"kind", "free_flow_hours", "capacity_flow", "coefficient",
                                "exponent"},
                           where + ".congestion", v);
                const auto t0 =
                    get_required_number(jc, "free_flow_hours", where + ".congestion", v);
                const auto cap =
                    get_required_number(jc, "capacity_flow", where + ".congestion", v);
                const double coef = get_number(jc, "coefficient", 0.15, where + ".congestion", v);
                const double expo = get_number(jc, "exponent", 4.0, where + ".congestion", v);
                if (t0 && cap) m.congestion = CongestionFn::bpr(*t0, *cap, coef, expo);
            } else if (kind) {
                v.add(where + ".congestion.kind must be 'affine' or 'bpr'");
            }
        } catch (const std::invalid_argument& e) {
            v.add(where + ".congestion: " + e.what());
        }
        setup.scenario.msps.push_back(std::move(m));
    }

    if (v.ok()) {
        try {
            setup.scenario.validate();
        } catch (const std::invalid_argument& e) {
            v.add(e.what());
        }
    }
}

inline void load_cost_tables(const nlohmann::json& j, CostTables& tables, Violations& v) {
    if (!j.contains("cost_tables")) return;
    const auto& jt = j["cost_tables"];
    if (!jt.is_object()) {
        v.add("scenario.cost_tables must be an object");
        return;
    }
    const std::string where = "scenario.cost_tables";
    check_keys(jt,
               {"vehicle_life_miles", "amod_wait_hours", "walk_speed_mph", "congestion_factor",
                "pt_wait_minutes", "micromobility", "vehicles"},
               where, v);
    tables.vehicle_life_miles =
        get_number(jt, "vehicle_life_miles", tables.vehicle_life_miles, where, v);
    tables.amod_wait_hours = get_number(jt, "amod_wait_hours", tables.amod_wait_hours, where, v);
    tables.walk_speed_mph = get_number(jt, "walk_speed_mph", tables.walk_speed_mph, where, v);
    tables.congestion_factor =
        get_number(jt, "congestion_factor", tables.congestion_factor, where, v);

    if (jt.contains("pt_wait_minutes")) {
        const auto& jw = jt["pt_wait_minutes"];
        if (!jw.is_object()) {
            v.add(where + ".pt_wait_minutes must be an object");
        } else {
            check_keys(jw, {"ubahn", "sbahn", "tram", "bus"}, where + ".pt_wait_minutes", v);
            static const char* names[4] = {"ubahn", "sbahn", "tram", "bus"};
            for (int i = 0; i < 4; ++i)
                tables.pt_wait_minutes[i] = get_number(jw, names[i], tables.pt_wait_minutes[i],
                                                       where + ".pt_wait_minutes", v);
        }
    }
    if (jt.contains("micromobility")) {
        const auto& jm = jt["micromobility"];
        if (!jm.is_object()) {
            v.add(where + ".micromobility must be an object");
        } else {
            check_keys(jm, {"es", "sb"}, where + ".micromobility", v);
            static const char* names[2] = {"es", "sb"};
            for (int i = 0; i < 2; ++i) {
                if (!jm.contains(names[i])) continue;
                const std::string at = where + ".micromobility." + names[i];
                const auto& je = jm[names[i]];
                if (!je.is_object()) {
                    v.add(at + " must be an object");
                    continue;
                }
                check_keys(je, {"cost_usd_per_mile", "speed_mph", "emissions_kg_per_mile"}, at, v);
                tables.mm_cost_usd_per_mile[i] =
                    get_number(je, "cost_usd_per_mile", tables.mm_cost_usd_per_mile[i], at, v);
                tables.mm_speed_mph[i] = get_number(je, "speed_mph", tables.mm_speed_mph[i], at, v);
                tables.mm_emissions_kg_per_mile[i] = get_number(
                    je, "emissions_kg_per_mile", tables.mm_emissions_kg_per_mile[i], at, v);
            }
        }
    }
    if (jt.contains("vehicles")) {
        const auto& jv = jt["vehicles"];
        if (!jv.is_object()) {
            v.add(where + ".vehicles must be an object");
        } else {
            check_keys(jv, {"sv_icev", "sv_hev", "sv_bev", "av_icev", "av_hev", "av_bev"},
                       where + ".vehicles", v);
            static const char* names[2][3] = {{"sv_icev", "sv_hev", "sv_bev"},
                                              {"av_icev", "av_hev", "av_bev"}};
            for (int a = 0; a < 2; ++a)
                for (int e = 0; e < 3; ++e) {
                    if (!jv.contains(names[a][e])) continue;
                    const std::string at = where + ".vehicles." + names[a][e];
                    const auto& jr = jv[names[a][e]];
                    if (!jr.is_object()) {
                        v.add(at + " must be an object");
                        continue;
                    }
                    check_keys(jr,
                               {"operational_usd_per_mile", "purchase_usd",
                                "emissions_kg_per_mile"},
                               at, v);
                    VehicleCostRow& row = tables.vehicle_rows[a][e];
                    row.operational_usd_per_mile = get_number(
                        jr, "operational_usd_per_mile", row.operational_usd_per_mile, at, v);
                    row.fixed_usd = get_number(jr, "purchase_usd", row.fixed_usd, at, v);
                    row.emissions_kg_per_mile =
                        get_number(jr, "emissions_kg_per_mile", row.emissions_kg_per_mile, at, v);
                }
        }
    }
}

inline void load_action_sets(const nlohmann::json& j, CatalogSets& sets, Violations& v) {
    if (!j.contains("actions")) return;
    const auto& ja = j["actions"];
    if (!ja.is_object()) {
        v.add("scenario.actions must be an object");
        return;
    }
    const std::string where = "scenario.actions";
    check_keys(ja,
               {"pt_short_prices_usd", "pt_long_prices_usd", "pt_cutoff_miles",
                "mile_taxes_usd_per_mile", "empty_tax_multipliers", "fleet_sizes", "engines",
                "automations", "mm_vehicles", "mm_base_prices_usd",
                "mm_variable_prices_usd_per_mile", "taxi_base_prices_usd",
                "taxi_variable_prices_usd_per_mile"},
               where, v);
    sets.pt_short_prices =
        get_number_list(ja, "pt_short_prices_usd", sets.pt_short_prices, where, v);
    sets.pt_long_prices = get_number_list(ja, "pt_long_prices_usd", sets.pt_long_prices, where, v);
    sets.cutoff_miles = get_number_list(ja, "pt_cutoff_miles", sets.cutoff_miles, where, v);
    sets.mile_taxes = get_number_list(ja, "mile_taxes_usd_per_mile", sets.mile_taxes, where, v);
    sets.empty_tax_multipliers =
        get_number_list(ja, "empty_tax_multipliers", sets.empty_tax_multipliers, where, v);
    sets.fleet_sizes = get_number_list(ja, "fleet_sizes", sets.fleet_sizes, where, v);
    sets.mm_base_prices = get_number_list(ja, "mm_base_prices_usd", sets.mm_base_prices, where, v);
    sets.mm_variable_prices = get_number_list(ja, "mm_variable_prices_usd_per_mile",
                                              sets.mm_variable_prices, where, v);
    sets.taxi_base_prices =
        get_number_list(ja, "taxi_base_prices_usd", sets.taxi_base_prices, where, v);
    sets.taxi_variable_prices = get_number_list(ja, "taxi_variable_prices_usd_per_mile",
                                                sets.taxi_variable_prices, where, v);

    auto parse_names = [&](const char* key, auto parser, auto& out) {
        if (!ja.contains(key)) return;
        if (!ja[key].is_array()) {
            v.add(where + "." + key + " must be an array of strings");
            return;
        }
        std::decay_t<decltype(out)> parsed;
        for (const auto& item : ja[key]) {
            if (!item.is_string()) {
                v.add(where + "." + key + " must contain only strings");
                return;
            }
            try {
                parsed.push_back(parser(item.template get<std::string>()));
            } catch (const std::invalid_argument& e) {
                v.add(where + "." + key + ": " + e.what());
                return;
            }
        }
        out = std::move(parsed);
    };
    parse_names("engines", [](const std::string& s) { return parse_engine(s); }, sets.engines);
    parse_names("automations", [](const std::string& s) { return parse_automation(s); },
                sets.automations);
    parse_names("mm_vehicles", [](const std::string& s) { return parse_mm_vehicle(s); },
                sets.mm_vehicles);
}

inline void load_network(const nlohmann::json& j, const std::filesystem::path& base,
                         NetworkSetup& setup, Violations& v) {
    check_keys(j,
               {"model", "graph_file", "demands_file", "co2_price_usd_per_kg", "weights",
                "value_of_time_usd_per_hour", "cost_tables", "actions", "threads", "qp_tolerance",
                "cache_file"},
               "scenario", v);

    auto resolve = [&](const std::string& rel) {
        std::filesystem::path p(rel);
        return (p.is_absolute() ? p : base / p).string();
    };

    if (const auto co2 = get_required_number(j, "co2_price_usd_per_kg", "scenario", v))
        setup.scenario.tables.co2_price_usd_per_kg = *co2;
    else
        setup.scenario.tables.co2_price_usd_per_kg = 0.0; // keeps later checks quiet;
                                                          // the violation above is the report
    setup.scenario.weights = get_weights(j, "scenario", v);

    if (j.contains("value_of_time_usd_per_hour")) {
        const auto& jv = j["value_of_time_usd_per_hour"];
        if (!jv.is_object()) {
            v.add("scenario.value_of_time_usd_per_hour must be an object with lower/upper");
        } else {
            check_keys(jv, {"lower", "upper"}, "scenario.value_of_time_usd_per_hour", v);
            setup.scenario.vot.lower = get_number(jv, "lower", setup.scenario.vot.lower,
                                                  "scenario.value_of_time_usd_per_hour", v);
            setup.scenario.vot.upper = get_number(jv, "upper", setup.scenario.vot.upper,
                                                  "scenario.value_of_time_usd_per_hour", v);
        }
    }

    load_cost_tables(j, setup.scenario.tables, v);
    load_action_sets(j, setup.sets, v);

    setup.threads = get_int(j, "threads", 1, "scenario", v);
    if (setup.threads < 1) v.add("scenario.threads must be >= 1");
    setup.qp_tolerance = get_number(j, "qp_tolerance", 1e-9, "scenario", v);
    if (!(setup.qp_tolerance > 0.0)) v.add("scenario.qp_tolerance must be > 0");
    if (const auto cache = get_string(j, "cache_file", "scenario", v, false))
        setup.cache_file = resolve(*cache);

    const auto graph_file = get_string(j, "graph_file", "scenario", v, true);
    const auto demands_file = get_string(j, "demands_file", "scenario", v, true);
    if (graph_file) setup.scenario.graph = load_graph_file(resolve(*graph_file), v);
    if (demands_file && setup.scenario.graph.vertex_count > 0)
        setup.scenario.demands =
            load_demands_file(resolve(*demands_file), setup.scenario.graph.vertex_count, v);

    try {
        setup.catalog = make_catalog(setup.sets);
    } catch (const std::invalid_argument& e) {
        v.add(std::string("scenario.actions: ") + e.what());
    }
    if (v.ok()) {
        try {
            setup.scenario.validate();
        } catch (const std::invalid_argument& e) {
            v.add(e.what());
        }
    }
}

} // namespace io_detail

// Parses and fully validates one scenario file; throws ScenarioError listing
// every violation found. Referenced side files are resolved relative to the
// scenario file's directory.
inline LoadedScenario load_scenario(const std::string& path) {
    LoadedScenario loaded;
    loaded.path = path;
    const std::string text = io_detail::read_text_file(path);
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ScenarioError("scenario '" + path + "' is not a JSON object");

    io_detail::Violations v;
    const auto model = io_detail::get_string(j, "model", "scenario", v, true);
    const auto base = std::filesystem::path(path).parent_path();
    if (model == std::optional<std::string>("congestion")) {
        loaded.kind = ModelKind::congestion;
        io_detail::load_congestion(j, loaded.congestion, v);
    } else if (model == std::optional<std::string>("network")) {
        loaded.kind = ModelKind::network;
        io_detail::load_network(j, base, loaded.network, v);
    } else if (model) {
        v.add("scenario.model must be 'congestion' or 'network'");
    }
    v.raise(path);
    return loaded;
}

} // namespace mobeq
