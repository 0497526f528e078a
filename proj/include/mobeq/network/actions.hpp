#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "../core/types.hpp"
#include "graph.hpp"

// Player action spaces for the city game and the cost/emission tables behind
// them. Defaults reproduce the published Berlin calibration; every grid can be
// overridden per scenario.

namespace mobeq {

enum class Engine { icev, hev, bev };
enum class Automation { sv, av };
enum class MmVehicle { es, sb }; // electric scooter / station-based bike

inline const char* engine_name(Engine e) {
    switch (e) {
        case Engine::icev: return "icev";
        case Engine::hev: return "hev";
        default: return "bev";
    }
}

inline Engine parse_engine(std::string_view s) {
    if (s == "icev") return Engine::icev;
    if (s == "hev") return Engine::hev;
    if (s == "bev") return Engine::bev;
    throw std::invalid_argument("unknown engine '" + std::string(s) + "'");
}

inline const char* automation_name(Automation a) { return a == Automation::sv ? "sv" : "av"; }

inline Automation parse_automation(std::string_view s) {
    if (s == "sv") return Automation::sv;
    if (s == "av") return Automation::av;
    throw std::invalid_argument("unknown automation level '" + std::string(s) + "'");
}

inline const char* mm_vehicle_name(MmVehicle v) { return v == MmVehicle::es ? "es" : "sb"; }

inline MmVehicle parse_mm_vehicle(std::string_view s) {
    if (s == "es") return MmVehicle::es;
    if (s == "sb") return MmVehicle::sb;
    throw std::invalid_argument("unknown mm vehicle '" + std::string(s) + "'");
}

namespace detail {
inline std::string num_label(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}
} // namespace detail

// Leader action: zone fares plus the two distance taxes on automated vehicles.
// The empty tax is stored as a multiplier of the mile tax.
struct MunicipalityAction {
    double pt_short_price = 0.0;
    double pt_long_price = 0.0;
    double cutoff_miles = 0.0;
    double mile_tax = 0.0;
    double empty_tax_multiplier = 0.0;

    double empty_mile_tax() const { return mile_tax * empty_tax_multiplier; }

    void validate() const {
        if (pt_short_price < 0 || pt_long_price < 0 || cutoff_miles < 0 || mile_tax < 0 ||
            empty_tax_multiplier < 0)
            throw std::invalid_argument("municipality action fields must be non-negative");
    }

    std::string label() const {
        return "ps" + detail::num_label(pt_short_price) + "|pl" +
               detail::num_label(pt_long_price) + "|d" + detail::num_label(cutoff_miles) +
               "|tm" + detail::num_label(mile_tax) + "|te" +
               detail::num_label(empty_tax_multiplier);
    }
};

// Zone fare: trips at or under the cutoff pay the short-distance price.
inline double pt_fare(double trip_distance_miles, const MunicipalityAction& action) {
    if (!(trip_distance_miles >= 0.0))
        throw std::invalid_argument("fare distance must be non-negative");
    return trip_distance_miles <= action.cutoff_miles ? action.pt_short_price
                                                      : action.pt_long_price;
}

struct AmodAction {
    Engine engine = Engine::icev;
    Automation automation = Automation::sv;
    double fleet_size = 0.0; // vehicles

    void validate() const {
        if (!(fleet_size >= 0.0)) throw std::invalid_argument("fleet size must be non-negative");
    }

    std::string label() const {
        return std::string(engine_name(engine)) + "|" + automation_name(automation) + "|n" +
               detail::num_label(fleet_size);
    }
};

struct MmAction {
    MmVehicle vehicle = MmVehicle::es;
    double base_price = 0.0;
    double variable_price = 0.0; // per mile

    void validate() const {
        if (base_price < 0 || variable_price < 0)
            throw std::invalid_argument("mm prices must be non-negative");
    }

    std::string label() const {
        return std::string(mm_vehicle_name(vehicle)) + "|b" + detail::num_label(base_price) +
               "|v" + detail::num_label(variable_price);
    }
};

struct TaxiAction {
    double base_price = 0.0;
    double variable_price = 0.0; // per mile

    void validate() const {
        if (base_price < 0 || variable_price < 0)
            throw std::invalid_argument("taxi prices must be non-negative");
    }

    std::string label() const {
        return "b" + detail::num_label(base_price) + "|v" + detail::num_label(variable_price);
    }
};

struct VehicleCostRow {
    double operational_usd_per_mile = 0.0;
    double fixed_usd = 0.0; // purchase price per vehicle
    double emissions_kg_per_mile = 0.0;
};

// Calibrated unit costs, speeds, waits, and conversion constants. The CO2
// price has no published default and must be set by the scenario.
struct CostTables {
    // Rows indexed [automation][engine] = [sv,av][icev,hev,bev].
    VehicleCostRow vehicle_rows[2][3] = {
        {{5.78, 19000.0, 0.16}, {5.86, 31000.0, 0.18}, {5.89, 29000.0, 0.13}},
        {{0.38, 89000.0, 0.16}, {0.45, 101000.0, 0.18}, {0.48, 99000.0, 0.13}},
    };
    double vehicle_life_miles = 186000.0;
    // Micromobility, indexed [es, sb].
    double mm_cost_usd_per_mile[2] = {0.79, 1.58};
    double mm_speed_mph[2] = {5.0, 7.5};
    double mm_emissions_kg_per_mile[2] = {0.101, 0.033};
    // Expected boarding wait, indexed [ubahn, sbahn, tram, bus].
    double pt_wait_minutes[4] = {5.0, 5.0, 7.0, 10.0};
    double co2_price_usd_per_kg = std::numeric_limits<double>::quiet_NaN();
    double amod_wait_hours = 3.0 / 60.0;
    double walk_speed_mph = 3.13;
    double congestion_factor = 1.56;

    const VehicleCostRow& vehicle(Automation a, Engine e) const {
        return vehicle_rows[a == Automation::sv ? 0 : 1][static_cast<int>(e)];
    }
    double mm_cost(MmVehicle v) const { return mm_cost_usd_per_mile[static_cast<int>(v)]; }
    double mm_speed(MmVehicle v) const { return mm_speed_mph[static_cast<int>(v)]; }
    double mm_emissions(MmVehicle v) const {
        return mm_emissions_kg_per_mile[static_cast<int>(v)];
    }

    PathTiming path_timing(MmVehicle v) const {
        PathTiming t;
        t.walk_speed_mph = walk_speed_mph;
        t.mm_speed_mph = mm_speed(v);
        t.ubahn_wait_min = pt_wait_minutes[0];
        t.sbahn_wait_min = pt_wait_minutes[1];
        t.tram_wait_min = pt_wait_minutes[2];
        t.bus_wait_min = pt_wait_minutes[3];
        return t;
    }

    void validate() const {
        for (const auto& rows : vehicle_rows)
            for (const VehicleCostRow& r : rows)
                if (r.operational_usd_per_mile < 0 || r.fixed_usd < 0 ||
                    r.emissions_kg_per_mile < 0)
                    throw std::invalid_argument("vehicle cost rows must be non-negative");
        if (!(vehicle_life_miles > 0)) throw std::invalid_argument("vehicle life must be positive");
        for (int i = 0; i < 2; ++i) {
            if (mm_cost_usd_per_mile[i] < 0 || mm_emissions_kg_per_mile[i] < 0)
                throw std::invalid_argument("mm cost table must be non-negative");
            if (!(mm_speed_mph[i] > 0)) throw std::invalid_argument("mm speed must be positive");
        }
        for (double w : pt_wait_minutes)
            if (w < 0) throw std::invalid_argument("pt waits must be non-negative");
        if (!(std::isfinite(co2_price_usd_per_kg)) || co2_price_usd_per_kg < 0)
            throw std::invalid_argument("co2_price_usd_per_kg must be set to a non-negative value");
        if (amod_wait_hours < 0) throw std::invalid_argument("amod wait must be non-negative");
        if (!(walk_speed_mph > 0)) throw std::invalid_argument("walk speed must be positive");
        if (!(congestion_factor >= 1)) throw std::invalid_argument("congestion factor must be >= 1");
    }
};

// The grids each player picks from. Defaults are the published city-scale
// sets; scenarios may override any of them (e.g. trimmed desk grids).
struct CatalogSets {
    std::vector<double> pt_short_prices = {0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<double> pt_long_prices = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> cutoff_miles = {0.0, 1.55, 3.10};
    std::vector<double> mile_taxes = [] {
        std::vector<double> t;
        for (int i = 0; i <= 10; ++i) t.push_back(0.16 * i);
        return t;
    }();
    std::vector<double> empty_tax_multipliers = {0.0, 1.0, 10.0};
    std::vector<double> fleet_sizes = [] {
        std::vector<double> f;
        for (int i = 0; i <= 16; ++i) f.push_back(1000.0 * i);
        return f;
    }();
    std::vector<Engine> engines = {Engine::icev, Engine::hev, Engine::bev};
    std::vector<Automation> automations = {Automation::sv, Automation::av};
    std::vector<MmVehicle> mm_vehicles = {MmVehicle::es, MmVehicle::sb};
    std::vector<double> mm_base_prices = {1.20};
    std::vector<double> mm_variable_prices = {0.72, 0.96, 1.21, 1.45, 1.69};
    std::vector<double> taxi_base_prices = {4.72};
    std::vector<double> taxi_variable_prices = {1.17, 1.95, 3.89, 5.84, 7.79};

    void validate() const {
        auto need = [](bool ok, const char* what) {
            if (!ok) throw std::invalid_argument(std::string("empty action set: ") + what);
        };
        need(!pt_short_prices.empty(), "pt_short_prices");
        need(!pt_long_prices.empty(), "pt_long_prices");
        need(!cutoff_miles.empty(), "cutoff_miles");
        need(!mile_taxes.empty(), "mile_taxes");
        need(!empty_tax_multipliers.empty(), "empty_tax_multipliers");
        need(!fleet_sizes.empty(), "fleet_sizes");
        need(!engines.empty(), "engines");
        need(!automations.empty(), "automations");
        need(!mm_vehicles.empty(), "mm_vehicles");
        need(!mm_base_prices.empty(), "mm_base_prices");
        need(!mm_variable_prices.empty(), "mm_variable_prices");
        need(!taxi_base_prices.empty(), "taxi_base_prices");
        need(!taxi_variable_prices.empty(), "taxi_variable_prices");
    }
};

struct ActionCatalog {
    std::vector<MunicipalityAction> municipality;
    std::vector<AmodAction> amod;
    std::vector<MmAction> mm;
    std::vector<TaxiAction> taxi;
};

inline ActionCatalog make_catalog(const CatalogSets& sets = {}) {
    sets.validate();
    ActionCatalog catalog;
    for (double ps : sets.pt_short_prices)
        for (double pl : sets.pt_long_prices)
            for (double d : sets.cutoff_miles)
                for (double tm : sets.mile_taxes)
                    for (double te : sets.empty_tax_multipliers)
                        catalog.municipality.push_back({ps, pl, d, tm, te});
    for (double n : sets.fleet_sizes)
        for (Engine e : sets.engines)
            for (Automation a : sets.automations) catalog.amod.push_back({e, a, n});
    for (MmVehicle v : sets.mm_vehicles)
        for (double b : sets.mm_base_prices)
            for (double p : sets.mm_variable_prices) catalog.mm.push_back({v, b, p});
    for (double b : sets.taxi_base_prices)
        for (double p : sets.taxi_variable_prices) catalog.taxi.push_back({b, p});
    return catalog;
}

inline std::vector<ActionSpace> action_spaces(const ActionCatalog& catalog) {
    std::vector<ActionSpace> spaces(4);
    for (int p = 0; p < 4; ++p) spaces[static_cast<std::size_t>(p)].player_id = p;
    for (const auto& a : catalog.municipality) spaces[0].labels.push_back(a.label());
    for (const auto& a : catalog.amod) spaces[1].labels.push_back(a.label());
    for (const auto& a : catalog.mm) spaces[2].labels.push_back(a.label());
    for (const auto& a : catalog.taxi) spaces[3].labels.push_back(a.label());
    for (const auto& s : spaces) s.validate();
    return spaces;
}

} // namespace mobeq
