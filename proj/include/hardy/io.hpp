#pragma once

// Tabular result emission as CSV (RFC 4180) or a single JSON object with
// "config", "results" and "diagnostics". Numeric cells are decimal strings.

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace hardy {

using Json = nlohmann::ordered_json;

struct Report {
    Json config = Json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;  ///< cells: strings, booleans or integers
    Json diagnostics = Json::object();

    void add_row(std::vector<Json> row) {
        if (row.size() != columns.size()) throw std::logic_error("report row width does not match the header");
        rows.push_back(std::move(row));
    }
};

/// Quotes a CSV field when it contains a comma, quote, CR or LF.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline std::string cell_text(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return {};
    return v.dump();
}

inline void write_csv(std::ostream& os, const Report& r) {
    auto line = [&](const auto& cells, auto&& text) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << csv_field(text(cells[i]));
        }
        os << "\r\n";
    };
    line(r.columns, [](const std::string& s) { return s; });
    for (const auto& row : r.rows) line(row, [](const Json& v) { return cell_text(v); });
}

inline void write_json(std::ostream& os, const Report& r) {
    Json out = Json::object();
    out["config"] = r.config;
    Json results = Json::array();
    for (const auto& row : r.rows) {
        Json obj = Json::object();
        for (std::size_t i = 0; i < r.columns.size(); ++i) obj[r.columns[i]] = row[i];
        results.push_back(std::move(obj));
    }
    out["results"] = std::move(results);
    out["diagnostics"] = r.diagnostics;
    os << out.dump(2) << '\n';
}

inline void write_report(std::ostream& os, const Report& r, const std::string& format) {
    if (format == "csv") {
        write_csv(os, r);
    } else {
        write_json(os, r);
    }
}

}  // namespace hardy
