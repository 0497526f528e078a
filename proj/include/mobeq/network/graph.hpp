#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Multimodal city multigraph plus time-minimal routing on a single mode's
// subgraph. Walk arcs double as access/egress for pt, mm, and taxi trips;
// amod trips are door-to-door on amod arcs only. Walk and mm traversal times
// are derived from speeds (the stored nominal time is for timetabled or road
// modes), and boarding a pt line costs that line type's expected wait.

namespace mobeq {

enum class Mode { amod, mm, pt, taxi, walk };

inline const char* mode_name(Mode m) {
    switch (m) {
        case Mode::amod: return "amod";
        case Mode::mm: return "mm";
        case Mode::pt: return "pt";
        case Mode::taxi: return "taxi";
        default: return "walk";
    }
}

inline Mode parse_mode(std::string_view s) {
    if (s == "amod") return Mode::amod;
    if (s == "mm") return Mode::mm;
    if (s == "pt") return Mode::pt;
    if (s == "taxi") return Mode::taxi;
    if (s == "walk") return Mode::walk;
    throw std::invalid_argument("unknown mode tag '" + std::string(s) + "'");
}

enum class PtLineType { ubahn, sbahn, tram, bus };

// Line ids carry their service type as a name prefix ("ubahn2", "bus47", ...).
inline PtLineType classify_pt_line(std::string_view line_id) {
    if (line_id.starts_with("ubahn")) return PtLineType::ubahn;
    if (line_id.starts_with("sbahn")) return PtLineType::sbahn;
    if (line_id.starts_with("tram")) return PtLineType::tram;
    if (line_id.starts_with("bus")) return PtLineType::bus;
    throw std::invalid_argument("pt line id '" + std::string(line_id) +
                                "' has no recognized service prefix");
}

struct Arc {
    int source = 0;
    int target = 0;
    Mode mode = Mode::walk;
    double length_miles = 0.0;
    double time_hours = 0.0; // nominal; authoritative for amod/taxi/pt arcs
    std::string pt_line;     // non-empty exactly when mode == pt
};

struct MobilityMultigraph {
    int vertex_count = 0;
    std::vector<Arc> arcs;

    void validate() const {
        if (vertex_count <= 0) throw std::invalid_argument("graph has no vertices");
        for (std::size_t i = 0; i < arcs.size(); ++i) {
            const Arc& a = arcs[i];
            const std::string where = "arc " + std::to_string(i);
            if (a.source < 0 || a.source >= vertex_count || a.target < 0 ||
                a.target >= vertex_count)
                throw std::invalid_argument(where + ": endpoint outside vertex range");
            if (!(a.length_miles > 0.0))
                throw std::invalid_argument(where + ": length must be positive");
            if (!(a.time_hours >= 0.0))
                throw std::invalid_argument(where + ": time must be non-negative");
            if ((a.mode == Mode::amod || a.mode == Mode::taxi || a.mode == Mode::pt) &&
                !(a.time_hours > 0.0))
                throw std::invalid_argument(where + ": timetabled/road arc needs positive time");
            if (a.mode == Mode::pt) {
                if (a.pt_line.empty())
                    throw std::invalid_argument(where + ": pt arc without line id");
                classify_pt_line(a.pt_line);
            }
        }
    }
};

struct Demand {
    int origin = 0;
    int destination = 0;
    double rate = 0.0; // customers per hour

    void validate(int vertex_count) const {
        if (origin < 0 || origin >= vertex_count || destination < 0 ||
            destination >= vertex_count)
            throw std::invalid_argument("demand endpoint outside vertex range");
        if (origin == destination) throw std::invalid_argument("demand with origin == destination");
        if (!(rate > 0.0)) throw std::invalid_argument("demand rate must be positive");
    }
};

// Peak-hour congestion: road (amod + taxi) travel times stretch by the factor;
// timetabled, micromobility, and walking arcs are unaffected.
inline MobilityMultigraph congestion_adjust(MobilityMultigraph graph, double factor) {
    if (!(factor >= 1.0)) throw std::invalid_argument("congestion factor must be >= 1");
    for (Arc& a : graph.arcs)
        if (a.mode == Mode::amod || a.mode == Mode::taxi) a.time_hours *= factor;
    return graph;
}

// Speeds and boarding waits needed to price a path in time units.
struct PathTiming {
    double walk_speed_mph = 3.13;
    double mm_speed_mph = 5.0;
    double ubahn_wait_min = 5.0;
    double sbahn_wait_min = 5.0;
    double tram_wait_min = 7.0;
    double bus_wait_min = 10.0;

    double wait_hours(PtLineType t) const {
        switch (t) {
            case PtLineType::ubahn: return ubahn_wait_min / 60.0;
            case PtLineType::sbahn: return sbahn_wait_min / 60.0;
            case PtLineType::tram: return tram_wait_min / 60.0;
            default: return bus_wait_min / 60.0;
        }
    }
};

struct ModeTrip {
    std::vector<int> arc_ids;        // in travel order
    double time_hours = 0.0;         // incl. boarding waits and walk legs
    double distance_miles = 0.0;     // every arc
    double mode_distance_miles = 0.0; // arcs of the routed mode only
    double walk_distance_miles = 0.0;
};

// Time-minimal path on the mode-induced subgraph. For pt the search state
// carries the line currently ridden, so every boarding (initial or transfer,
// or re-boarding after a walk leg) pays that line's wait. Unreachable
// destinations yield nullopt.
inline std::optional<ModeTrip> shortest_path_mode(const MobilityMultigraph& graph, Mode mode,
                                                  int origin, int destination,
                                                  const PathTiming& timing = {}) {
    if (origin < 0 || origin >= graph.vertex_count || destination < 0 ||
        destination >= graph.vertex_count)
        throw std::out_of_range("path endpoint outside vertex range");
    if (!(timing.walk_speed_mph > 0.0) || !(timing.mm_speed_mph > 0.0))
        throw std::invalid_argument("speeds must be positive");

    const bool walk_access = (mode == Mode::pt || mode == Mode::mm || mode == Mode::taxi);

    struct Edge {
        int to;
        int arc;
        double time;
        int line; // -1 off-line, otherwise index into line id table
        double board_wait;
    };
    std::vector<std::string> lines;
    std::vector<std::vector<Edge>> adjacency(static_cast<std::size_t>(graph.vertex_count));
    for (std::size_t id = 0; id < graph.arcs.size(); ++id) {
        const Arc& a = graph.arcs[id];
        if (!(a.mode == mode || (walk_access && a.mode == Mode::walk))) continue;
        double t = a.time_hours;
        if (a.mode == Mode::walk) t = a.length_miles / timing.walk_speed_mph;
        if (a.mode == Mode::mm) t = a.length_miles / timing.mm_speed_mph;
        int line = -1;
        double wait = 0.0;
        if (a.mode == Mode::pt) {
            const auto it = std::find(lines.begin(), lines.end(), a.pt_line);
            line = static_cast<int>(it - lines.begin());
            if (it == lines.end()) lines.push_back(a.pt_line);
            wait = timing.wait_hours(classify_pt_line(a.pt_line));
        }
        adjacency[static_cast<std::size_t>(a.source)].push_back(
            {a.target, static_cast<int>(id), t, line, wait});
    }

    const int line_states = static_cast<int>(lines.size()) + 1; // 0 = not riding
    const std::size_t states = static_cast<std::size_t>(graph.vertex_count) *
                               static_cast<std::size_t>(line_states);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(states, inf);
    std::vector<std::pair<int, int>> pred(states, {-1, -1}); // (arc, previous state)

    auto state_of = [&](int vertex, int line) {
        return static_cast<std::size_t>(vertex) * static_cast<std::size_t>(line_states) +
               static_cast<std::size_t>(line + 1);
    };

    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[state_of(origin, -1)] = 0.0;
    queue.push({0.0, state_of(origin, -1)});
    while (!queue.empty()) {
        const auto [d, s] = queue.top();
        queue.pop();
        if (d > dist[s]) continue;
        const int vertex = static_cast<int>(s / static_cast<std::size_t>(line_states));
        const int line = static_cast<int>(s % static_cast<std::size_t>(line_states)) - 1;
        for (const Edge& e : adjacency[static_cast<std::size_t>(vertex)]) {
            const double extra = (e.line >= 0 && e.line != line) ? e.board_wait : 0.0;
            const std::size_t ns = state_of(e.to, e.line);
            const double nd = d + e.time + extra;
            if (nd < dist[ns]) {
                dist[ns] = nd;
                pred[ns] = {e.arc, static_cast<int>(s)};
                queue.push({nd, ns});
            }
        }
    }

    std::size_t best = states;
    double best_time = inf;
    for (int line = -1; line < static_cast<int>(lines.size()); ++line) {
        const std::size_t s = state_of(destination, line);
        if (dist[s] < best_time) {
            best_time = dist[s];
            best = s;
        }
    }
    if (best == states) return std::nullopt;

    ModeTrip trip;
    trip.time_hours = best_time;
    for (std::size_t s = best; pred[s].first >= 0;
         s = static_cast<std::size_t>(pred[s].second))
        trip.arc_ids.push_back(pred[s].first);
    std::reverse(trip.arc_ids.begin(), trip.arc_ids.end());
    for (int id : trip.arc_ids) {
        const Arc& a = graph.arcs[static_cast<std::size_t>(id)];
        trip.distance_miles += a.length_miles;
        if (a.mode == mode) trip.mode_distance_miles += a.length_miles;
        if (a.mode == Mode::walk) trip.walk_distance_miles += a.length_miles;
    }
    return trip;
}

} // namespace mobeq
