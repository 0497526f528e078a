#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Flat results container behind every exporter: a header plus rows of
// pre-formatted cells. Keeping cells as text makes round-trips exact and
// byte-level determinism checks trivial; numeric cells are formatted once,
// with 9 significant digits, at insertion time.

namespace mobeq {

inline std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// Strict string-to-double: the whole cell must parse.
inline double parse_number(const std::string& cell) {
    if (cell.empty()) throw std::invalid_argument("empty cell where a number was expected");
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size())
        throw std::invalid_argument("not a number: '" + cell + "'");
    return v;
}

struct ResultsTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    friend bool operator==(const ResultsTable&, const ResultsTable&) = default;

    std::size_t column_index(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::invalid_argument("unknown column '" + std::string(name) + "'");
    }

    const std::string& cell(std::size_t row, std::string_view name) const {
        return rows.at(row).at(column_index(name));
    }

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != columns.size())
            throw std::invalid_argument("row has " + std::to_string(cells.size()) +
                                        " cells, table has " + std::to_string(columns.size()) +
                                        " columns");
        rows.push_back(std::move(cells));
    }
};

namespace io_detail {

inline bool needs_quoting(const std::string& cell) {
    return cell.find_first_of(",\"\n\r") != std::string::npos;
}

inline void write_cell(std::string& out, const std::string& cell) {
    if (!needs_quoting(cell)) {
        out += cell;
        return;
    }
    out += '"';
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

} // namespace io_detail

inline std::string to_csv(const ResultsTable& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ',';
        io_detail::write_cell(out, table.columns[c]);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            io_detail::write_cell(out, row[c]);
        }
        out += '\n';
    }
    return out;
}

inline ResultsTable from_csv(const std::string& text) {
    std::vector<std::vector<std::string>> lines;
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false, had_any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
            had_any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (had_any || !cell.empty()) {
                cells.push_back(std::move(cell));
                cell.clear();
                lines.push_back(std::move(cells));
                cells.clear();
                had_any = false;
            }
        } else {
            cell += c;
        }
    }
    if (quoted) throw std::runtime_error("results data ends inside a quoted cell");
    if (had_any || !cell.empty()) {
        cells.push_back(std::move(cell));
        lines.push_back(std::move(cells));
    }
    if (lines.empty()) throw std::runtime_error("results data has no header line");

    ResultsTable table;
    table.columns = std::move(lines.front());
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].size() != table.columns.size())
            throw std::runtime_error("results row " + std::to_string(r) + " has " +
                                     std::to_string(lines[r].size()) + " cells, expected " +
                                     std::to_string(table.columns.size()));
        table.rows.push_back(std::move(lines[r]));
    }
    return table;
}

inline void save_results(const ResultsTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write results file '" + path + "'");
    const std::string text = to_csv(table);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("short write to results file '" + path + "'");
}

inline ResultsTable load_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read results file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_csv(buf.str());
}

// Plot-ready projection of a results table: chosen axis columns (hourly-dollar
// metrics rescaled, e.g. into 100k-$/h units) plus one classification column
// for coloring the points.
struct PlotSelection {
    std::vector<std::string> axes;
    std::string classification;
    double metric_scale = 100000.0; // divides axis columns measured in $/h
};

inline ResultsTable export_plot_data(const ResultsTable& table, const PlotSelection& selection) {
    if (table.rows.empty()) throw std::invalid_argument("no rows to export");
    if (selection.axes.empty()) throw std::invalid_argument("no plot axes selected");
    if (!(selection.metric_scale > 0.0))
        throw std::invalid_argument("metric scale must be positive");

    constexpr std::string_view hourly = "_usd_per_hour";
    std::vector<std::size_t> source;
    std::vector<bool> scaled;
    ResultsTable out;
    for (const std::string& axis : selection.axes) {
        std::size_t idx;
        try {
            idx = table.column_index(axis);
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("unknown axis '" + axis + "'");
        }
        const bool metric = axis.size() > hourly.size() &&
                            axis.compare(axis.size() - hourly.size(), hourly.size(), hourly) == 0;
        const bool rescale = metric && selection.metric_scale != 1.0;
        source.push_back(idx);
        scaled.push_back(rescale);
        if (rescale) {
            const std::string stem = axis.substr(0, axis.size() - hourly.size());
            out.columns.push_back(stem + "_" + format_g9(selection.metric_scale) +
                                  "usd_per_hour");
        } else {
            out.columns.push_back(axis);
        }
    }
    std::size_t class_idx = 0;
    if (!selection.classification.empty()) {
        try {
            class_idx = table.column_index(selection.classification);
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("unknown axis '" + selection.classification + "'");
        }
        out.columns.push_back(selection.classification);
    }

    for (const auto& row : table.rows) {
        std::vector<std::string> cells;
        cells.reserve(out.columns.size());
        for (std::size_t a = 0; a < source.size(); ++a) {
            if (scaled[a])
                cells.push_back(format_g9(parse_number(row[source[a]]) / selection.metric_scale));
            else
                cells.push_back(row[source[a]]);
        }
        if (!selection.classification.empty()) cells.push_back(row[class_idx]);
        out.rows.push_back(std::move(cells));
    }
    return out;
}

} // namespace mobeq
