#pragma once

// Text formats: the JSON scenario document, CSV series/matrix/vector tables,
// and simulation traces in table (CSV) or structured (JSON) form. Numbers are
// written with 17 significant digits (CSV) or shortest round-trip form (JSON),
// so every reader here inverts its writer exactly.

#include <infnet/error.hpp>
#include <infnet/scenario.hpp>
#include <infnet/simulation.hpp>
#include <infnet/types.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace infnet {

// ---------------------------------------------------------------------------
// Numbers and CSV primitives
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    std::array<char, 40> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return {buf.data(), res.ptr};
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<long long> to_integer(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

struct CsvLine {
    std::size_t number = 0;  ///< 1-based line number in the source
    std::vector<std::string> cells;
    std::vector<std::size_t> columns;  ///< 1-based starting column of each cell
};

// Splits into non-blank lines of comma-separated cells. A cell wrapped in
// double quotes may contain commas; "" inside it stands for one quote.
inline std::vector<CsvLine> split_csv(std::string_view text) {
    std::vector<CsvLine> lines;
    std::size_t number = 0;
    while (!text.empty()) {
        ++number;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;
        CsvLine out;
        out.number = number;
        std::size_t pos = 0;
        while (true) {
            out.columns.push_back(pos + 1);
            std::size_t end = line.find(',', pos);
            const auto lead = trim(line.substr(pos, end == std::string_view::npos ? line.npos : end - pos));
            if (!lead.empty() && lead.front() == '"') {
                std::string cell;
                std::size_t k = line.find('"', pos) + 1;
                bool closed = false;
                while (k < line.size()) {
                    if (line[k] == '"') {
                        if (k + 1 < line.size() && line[k + 1] == '"') {
                            cell += '"';
                            k += 2;
                            continue;
                        }
                        closed = true;
                        ++k;
                        break;
                    }
                    cell += line[k++];
                }
                end = line.find(',', k);
                if (!closed || !trim(line.substr(k, end == std::string_view::npos ? line.npos : end - k)).empty())
                    throw parse_error("malformed quoted cell", number, pos + 1, ParseErrorKind::syntax);
                out.cells.push_back(std::move(cell));
            } else {
                out.cells.emplace_back(lead);
            }
            if (end == std::string_view::npos) break;
            pos = end + 1;
        }
        lines.push_back(std::move(out));
    }
    return lines;
}

/// Quotes a cell when it holds a comma, quote or surrounding blanks.
inline std::string csv_cell(std::string_view s) {
    const bool plain = s.find_first_of(",\"\r\n") == std::string_view::npos && trim(s) == s;
    if (plain) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline double cell_double(const CsvLine& line, std::size_t k) {
    const auto v = to_double(line.cells[k]);
    if (!v)
        throw parse_error("'" + std::string(line.cells[k]) + "' is not a finite number", line.number,
                          line.columns[k], ParseErrorKind::non_numeric);
    return *v;
}

inline bool looks_numeric(const CsvLine& line) { return !line.cells.empty() && to_double(line.cells[0]).has_value(); }

inline std::vector<std::vector<double>> numeric_rows(const std::vector<CsvLine>& lines, std::size_t first) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = first; k < lines.size(); ++k) {
        std::vector<double> row;
        for (std::size_t c = 0; c < lines[k].cells.size(); ++c) row.push_back(cell_double(lines[k], c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string header_row(const char* prefix, std::size_t n) {
    std::string s;
    for (std::size_t j = 0; j < n; ++j) {
        if (j) s += ',';
        s += prefix + std::to_string(j + 1);
    }
    return s;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Matrix and vector tables
// ---------------------------------------------------------------------------

/// Square matrix as CSV; a non-numeric first line is taken as a header.
inline SquareMatrix parse_matrix(std::string_view text) {
    const auto lines = detail::split_csv(text);
    const std::size_t first = !lines.empty() && !detail::looks_numeric(lines[0]) ? 1 : 0;
    if (lines.size() <= first) throw parse_error("matrix table has no rows", 1, 1, ParseErrorKind::shape);
    const auto rows = detail::numeric_rows(lines, first);
    for (std::size_t k = 0; k < rows.size(); ++k)
        if (rows[k].size() != rows.size())
            throw parse_error("matrix row has " + std::to_string(rows[k].size()) + " cells, expected " +
                                  std::to_string(rows.size()) + " (matrix must be square)",
                              lines[first + k].number, 1, ParseErrorKind::shape);
    return SquareMatrix::from_rows(rows);
}

inline std::string write_matrix(const SquareMatrix& m) {
    std::string out = detail::header_row("S", m.size()) + "\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

/// A single row of numbers, optionally preceded by a header.
inline std::vector<double> parse_vector(std::string_view text) {
    const auto lines = detail::split_csv(text);
    const std::size_t first = !lines.empty() && !detail::looks_numeric(lines[0]) ? 1 : 0;
    if (lines.size() != first + 1)
        throw parse_error("vector table must have exactly one data row", lines.empty() ? 1 : lines.back().number, 1,
                          ParseErrorKind::shape);
    return detail::numeric_rows(lines, first).front();
}

inline std::string write_vector(std::span<const double> v) {
    std::string out = detail::header_row("S", v.size()) + "\n";
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (j) out += ',';
        out += format_double(v[j]);
    }
    return out + "\n";
}

// ---------------------------------------------------------------------------
// Series tables
// ---------------------------------------------------------------------------

struct SeriesRow {
    Step t = 0;
    std::vector<double> w;
    std::optional<double> ihdi;

    friend bool operator==(const SeriesRow&, const SeriesRow&) = default;
};

struct SeriesTable {
    std::vector<std::string> names;
    bool has_ihdi = false;
    std::vector<SeriesRow> rows;

    PerformanceVector performance(std::size_t k) const { return {rows[k].w, rows[k].t}; }

    friend bool operator==(const SeriesTable&, const SeriesTable&) = default;
};

/// `t,S1,...,Sn[,IHDI]` followed by data rows.
inline SeriesTable parse_series(std::string_view text, bool normalized = true) {
    const auto lines = detail::split_csv(text);
    if (lines.empty()) throw parse_error("series table is empty; expected header 't,S1,...'", 1, 1,
                                         ParseErrorKind::missing_header);
    const auto& head = lines[0];
    if (!detail::iequals(head.cells[0], "t"))
        throw parse_error(detail::looks_numeric(head) ? "missing header line; expected 't,S1,...'"
                                                      : "header must start with column 't'",
                          head.number, 1, ParseErrorKind::missing_header);

    SeriesTable table;
    std::size_t n_cols = head.cells.size();
    table.has_ihdi = n_cols > 1 && detail::iequals(head.cells.back(), "IHDI");
    const std::size_t n = n_cols - 1 - (table.has_ihdi ? 1 : 0);
    if (n < 1) throw parse_error("header names no subsystem columns", head.number, 1, ParseErrorKind::missing_header);
    std::set<std::string> seen;
    for (std::size_t c = 1; c <= n; ++c) {
        std::string name(head.cells[c]);
        if (name.empty() || !seen.insert(name).second)
            throw parse_error("subsystem column names must be unique and non-empty", head.number, head.columns[c],
                              ParseErrorKind::missing_header);
        table.names.push_back(std::move(name));
    }

    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto& line = lines[k];
        if (line.cells.size() != n_cols)
            throw parse_error("row has " + std::to_string(line.cells.size()) + " cells, header has " +
                                  std::to_string(n_cols),
                              line.number, 1, ParseErrorKind::shape);
        SeriesRow row;
        const auto t = detail::to_integer(line.cells[0]);
        if (!t)
            throw parse_error("t = '" + std::string(line.cells[0]) + "' is not an integer", line.number, 1,
                              ParseErrorKind::non_numeric);
        row.t = *t;
        if (!table.rows.empty() && row.t <= table.rows.back().t)
            throw parse_error("t = " + std::to_string(row.t) + " does not increase on the previous row", line.number,
                              1, ParseErrorKind::non_monotone);
        for (std::size_t c = 1; c <= n; ++c) {
            const double v = detail::cell_double(line, c);
            if (normalized && (v < 0.0 || v > 1.0))
                throw parse_error(table.names[c - 1] + " = " + format_double(v) + " is outside [0, 1]", line.number,
                                  line.columns[c], ParseErrorKind::out_of_range);
            row.w.push_back(v);
        }
        if (table.has_ihdi) {
            const double v = detail::cell_double(line, n_cols - 1);
            if (v <= 0.0 || v > 1.0)
                throw parse_error("IHDI = " + format_double(v) + " is outside (0, 1]", line.number,
                                  line.columns[n_cols - 1], ParseErrorKind::out_of_range);
            row.ihdi = v;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline std::string write_series(const SeriesTable& table) {
    std::string out = "t";
    for (const auto& n : table.names) out += "," + detail::csv_cell(n);
    if (table.has_ihdi) out += ",IHDI";
    out += '\n';
    for (const auto& r : table.rows) {
        out += std::to_string(r.t);
        for (double v : r.w) out += "," + format_double(v);
        if (table.has_ihdi) out += "," + format_double(r.ihdi.value_or(0.0));
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario documents
// ---------------------------------------------------------------------------

namespace detail {

using json = nlohmann::json;

inline std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // e.byte points one past the offending character
        const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        std::string what = e.what();
        if (const auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
        throw parse_error(what, line, col, ParseErrorKind::syntax);
    }
}

inline std::optional<std::vector<double>> json_vector(const json& j, const std::string& key,
                                                      std::vector<std::string>& errors) {
    if (!j.is_array()) {
        errors.push_back(key + " must be an array of numbers");
        return std::nullopt;
    }
    std::vector<double> v;
    for (std::size_t k = 0; k < j.size(); ++k) {
        if (!j[k].is_number()) {
            errors.push_back(key + "[" + std::to_string(k + 1) + "] is not a number");
            return std::nullopt;
        }
        v.push_back(j[k].get<double>());
    }
    return v;
}

inline std::optional<SquareMatrix> json_matrix(const json& j, const std::string& key,
                                               std::vector<std::string>& errors) {
    if (!j.is_array()) {
        errors.push_back(key + " must be an array of arrays");
        return std::nullopt;
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < j.size(); ++k) {
        auto row = json_vector(j[k], key + "[" + std::to_string(k + 1) + "]", errors);
        if (!row) return std::nullopt;
        if (row->size() != j.size()) {
            errors.push_back(key + "[" + std::to_string(k + 1) + "] has " + std::to_string(row->size()) +
                             " entries, expected " + std::to_string(j.size()) + " (matrix must be square)");
            return std::nullopt;
        }
        rows.push_back(std::move(*row));
    }
    return SquareMatrix::from_rows(rows);
}

inline json matrix_json(const SquareMatrix& m) {
    json out = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) out.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
    return out;
}

} // namespace detail

/// Parses and validates a scenario document. Structural problems and
/// invariant violations are reported together in one validation_error.
inline Scenario parse_scenario(std::string_view text) {
    using detail::json;
    const json doc = detail::parse_json(text);
    if (!doc.is_object()) throw validation_error({"scenario document must be a JSON object"});

    static const std::set<std::string> known{"subsystems", "w0", "w1", "r1", "u", "policy", "options", "horizon"};
    std::vector<std::string> errors;
    for (const auto& [key, _] : doc.items())
        if (!known.count(key)) errors.push_back("unknown field '" + key + "'");

    Scenario s;
    bool complete = true;

    for (const char* key : {"w0", "w1"}) {
        if (!doc.contains(key)) {
            errors.push_back(std::string("missing field '") + key +
                             "': the strength update needs two consecutive performance snapshots, W(0) and W(1)");
            complete = false;
            continue;
        }
        auto v = detail::json_vector(doc.at(key), key, errors);
        if (!v) complete = false;
        else (std::string(key) == "w0" ? s.w0 : s.w1) = std::move(*v);
    }

    if (!doc.contains("r1")) {
        errors.push_back("missing field 'r1': the seed influence matrix R(1) is required");
        complete = false;
    } else if (auto m = detail::json_matrix(doc.at("r1"), "r1", errors)) {
        s.r1 = std::move(*m);
    } else {
        complete = false;
    }

    if (doc.contains("u")) {
        const auto& u = doc.at("u");
        if (u.is_string()) {
            if (u.get<std::string>() != "calibrate") errors.push_back("u must be a matrix or the string \"calibrate\"");
        } else if (auto m = detail::json_matrix(u, "u", errors)) {
            s.utility = std::move(*m);
        } else {
            complete = false;
        }
    }

    if (doc.contains("subsystems")) {
        const auto& names = doc.at("subsystems");
        if (!names.is_array()) {
            errors.push_back("subsystems must be an array of strings");
            complete = false;
        } else {
            for (const auto& n : names) {
                if (!n.is_string()) {
                    errors.push_back("subsystems must be an array of strings");
                    complete = false;
                    break;
                }
                s.subsystems.push_back(n.get<std::string>());
            }
        }
    } else {
        const std::size_t n = !s.w0.empty() ? s.w0.size() : !s.w1.empty() ? s.w1.size() : s.r1.size();
        if (n >= 2) s.subsystems = SubsystemSet::defaults_for(n).names();
    }

    if (doc.contains("options")) {
        const auto& o = doc.at("options");
        if (!o.is_object()) {
            errors.push_back("options must be an object");
        } else {
            for (const auto& [key, val] : o.items()) {
                if (key == "clamp" || key == "normalize_w") {
                    if (!val.is_boolean()) errors.push_back("options." + key + " must be a boolean");
                    else (key == "clamp" ? s.options.clamp : s.options.normalize_w) = val.get<bool>();
                } else if (key == "eps_delta") {
                    if (!val.is_number()) errors.push_back("options.eps_delta must be a number");
                    else s.options.eps_delta = val.get<double>();
                } else {
                    errors.push_back("unknown field 'options." + key + "'");
                }
            }
        }
    }

    if (doc.contains("horizon")) {
        const auto& h = doc.at("horizon");
        if (!h.is_number_integer() || h.get<long long>() < 1) errors.push_back("horizon must be an integer >= 1");
        else s.horizon = h.get<std::size_t>();
    }

    if (doc.contains("policy")) {
        const auto& p = doc.at("policy");
        if (!p.is_object()) {
            errors.push_back("policy must be an object mapping step -> array");
        } else {
            for (const auto& [key, val] : p.items()) {
                const auto step = detail::to_integer(key);
                if (!step || detail::trim(key) != key) {
                    errors.push_back("policy key '" + key + "' is not an integer step");
                    continue;
                }
                if (auto v = detail::json_vector(val, "policy[" + key + "]", errors)) s.policy[*step] = std::move(*v);
            }
        }
    }

    if (complete) {
        auto more = validate(s);
        errors.insert(errors.end(), more.begin(), more.end());
    }
    if (!errors.empty()) throw validation_error(std::move(errors));
    return s;
}

inline std::string write_scenario(const Scenario& s) {
    nlohmann::ordered_json doc;
    doc["subsystems"] = s.subsystems;
    doc["w0"] = s.w0;
    doc["w1"] = s.w1;
    doc["r1"] = detail::matrix_json(s.r1);
    if (s.utility) doc["u"] = detail::matrix_json(*s.utility);
    else doc["u"] = "calibrate";
    doc["policy"] = nlohmann::ordered_json::object();
    for (const auto& [t, e] : s.policy) doc["policy"][std::to_string(t)] = e;
    doc["options"] = {{"clamp", s.options.clamp}, {"eps_delta", s.options.eps_delta},
                      {"normalize_w", s.options.normalize_w}};
    doc["horizon"] = s.horizon;
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

enum class TraceFormat { table, structured };

inline std::string write_trace(const SimulationTrace& trace, TraceFormat format) {
    const std::size_t n = trace.subsystems.size();
    if (format == TraceFormat::table) {
        std::string out = "t," + detail::header_row("W", n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out += ",R" + std::to_string(i + 1) + std::to_string(j + 1);
        out += '\n';
        for (const auto& s : trace.steps) {
            out += std::to_string(s.timestamp());
            for (double v : s.w.values()) out += "," + format_double(v);
            for (double v : s.r.entries().flat()) out += "," + format_double(v);
            out += '\n';
        }
        return out;
    }

    nlohmann::ordered_json doc;
    doc["format"] = "infnet-trace";
    doc["version"] = 1;
    doc["subsystems"] = trace.subsystems;
    doc["steps"] = nlohmann::ordered_json::array();
    for (const auto& s : trace.steps) {
        nlohmann::ordered_json st;
        st["t"] = s.timestamp();
        st["w"] = std::vector<double>(s.w.values().begin(), s.w.values().end());
        nlohmann::ordered_json r = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < s.r.size(); ++i)
            r.push_back(std::vector<double>(s.r.row(i).begin(), s.r.row(i).end()));
        st["r"] = std::move(r);
        st["branches"] = {{"one_zero", s.counts.one_zero},
                          {"equal", s.counts.equal},
                          {"ratio", s.counts.ratio},
                          {"degenerate", s.counts.degenerate}};
        doc["steps"].push_back(std::move(st));
    }
    return doc.dump(2) + "\n";
}

namespace detail {

inline SimulationTrace parse_trace_table(std::string_view text) {
    const auto lines = split_csv(text);
    if (lines.empty() || !iequals(lines[0].cells[0], "t"))
        throw parse_error("trace table must start with header 't,W1,...'", lines.empty() ? 1 : lines[0].number, 1,
                          ParseErrorKind::missing_header);
    const std::size_t cols = lines[0].cells.size();
    std::size_t n = 0;
    while (1 + n + n * n < cols) ++n;
    if (n == 0 || 1 + n + n * n != cols)
        throw parse_error("trace header has " + std::to_string(cols) + " columns; expected 1 + n + n*n",
                          lines[0].number, 1, ParseErrorKind::shape);

    SimulationTrace trace;
    trace.subsystems = SubsystemSet::defaults_for(std::max<std::size_t>(n, 2)).names();
    trace.subsystems.resize(n);
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto& line = lines[k];
        if (line.cells.size() != cols)
            throw parse_error("row has " + std::to_string(line.cells.size()) + " cells, header has " +
                                  std::to_string(cols),
                              line.number, 1, ParseErrorKind::shape);
        const auto t = to_integer(line.cells[0]);
        if (!t) throw parse_error("t is not an integer", line.number, 1, ParseErrorKind::non_numeric);
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = cell_double(line, 1 + i);
        SquareMatrix r(n);
        for (std::size_t c = 0; c < n * n; ++c) r(c / n, c % n) = cell_double(line, 1 + n + c);
        try {
            trace.steps.push_back({PerformanceVector(std::move(w), *t), InfluenceMatrix(std::move(r), *t), {}});
        } catch (const domain_error& e) {
            throw parse_error(e.what(), line.number, 1, ParseErrorKind::out_of_range);
        }
    }
    return trace;
}

inline SimulationTrace parse_trace_json(std::string_view text) {
    const json doc = parse_json(text);
    try {
        SimulationTrace trace;
        trace.subsystems = doc.at("subsystems").get<std::vector<std::string>>();
        for (const auto& st : doc.at("steps")) {
            const Step t = st.at("t").get<Step>();
            std::vector<std::vector<double>> rows = st.at("r").get<std::vector<std::vector<double>>>();
            BranchCounts c;
            const auto& b = st.at("branches");
            c.one_zero = b.at("one_zero").get<std::size_t>();
            c.equal = b.at("equal").get<std::size_t>();
            c.ratio = b.at("ratio").get<std::size_t>();
            c.degenerate = b.at("degenerate").get<std::size_t>();
            trace.steps.push_back({PerformanceVector(st.at("w").get<std::vector<double>>(), t),
                                   InfluenceMatrix(SquareMatrix::from_rows(rows), t), c});
        }
        return trace;
    } catch (const json::exception& e) {
        throw parse_error(std::string("malformed structured trace: ") + e.what(), 1, 1, ParseErrorKind::syntax);
    } catch (const domain_error& e) {
        throw parse_error(std::string("invalid trace entry: ") + e.what(), 1, 1, ParseErrorKind::out_of_range);
    }
}

} // namespace detail

/// Reads either trace format; a leading '{' selects the structured form.
/// Table traces carry no branch counts and get default subsystem names.
inline SimulationTrace parse_trace(std::string_view text) {
    const auto body = detail::trim(text);
    auto trace = !body.empty() && body.front() == '{' ? detail::parse_trace_json(text) : detail::parse_trace_table(text);
    auto problems = validate(trace);
    if (!problems.empty()) throw validation_error(std::move(problems));
    return trace;
}

} // namespace infnet
