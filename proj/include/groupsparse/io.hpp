#pragma once
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <json.hpp>
#include <groupsparse/core.hpp>

namespace groupsparse {
namespace io {

using json = nlohmann::json;

/// Malformed or unreadable input file.
class InputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Rounds to 12 significant digits so reports are stable across platforms.
inline double round12(double x)
{
    if (!std::isfinite(x) || x == 0) return x;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return std::strtod(buf, nullptr);
}

inline json vector_to_json(const vec_t& v, bool round = false)
{
    json a = json::array();
    for (index_t i = 0; i < v.size(); ++i) a.push_back(round ? round12(v[i]) : v[i]);
    return a;
}

inline vec_t vector_from_json(const json& j)
{
    if (!j.is_array()) throw InputError("expected a JSON array of numbers");
    vec_t v(static_cast<index_t>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InputError("expected a number at index " + std::to_string(i));
        v[static_cast<index_t>(i)] = j[i].get<double>();
    }
    return v;
}

/// {"m": rows, "n": cols, "data": [row-major entries]}
inline json matrix_to_json(const mat_t& M)
{
    json data = json::array();
    for (index_t r = 0; r < M.rows(); ++r)
        for (index_t c = 0; c < M.cols(); ++c) data.push_back(M(r, c));
    return json{{"m", M.rows()}, {"n", M.cols()}, {"data", std::move(data)}};
}

inline mat_t matrix_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("m") || !j.contains("n") || !j.contains("data")) {
        throw InputError("matrix: expected {\"m\", \"n\", \"data\"}");
    }
    const auto m = j.at("m").get<long long>();
    const auto n = j.at("n").get<long long>();
    const auto& data = j.at("data");
    if (m < 0 || n < 0 || !data.is_array() || static_cast<long long>(data.size()) != m * n) {
        throw InputError("matrix: data length does not match m * n");
    }
    mat_t M(m, n);
    for (long long r = 0; r < m; ++r)
        for (long long c = 0; c < n; ++c) M(r, c) = data[static_cast<std::size_t>(r * n + c)].get<double>();
    return M;
}

inline json partition_to_json(const GroupPartition& p)
{
    return json{{"n", p.n()}, {"groups", p.groups()}};
}

inline GroupPartition partition_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("n") || !j.contains("groups")) {
        throw InputError("partition: expected {\"n\", \"groups\"}");
    }
    try {
        const auto n = j.at("n").get<long long>();
        if (n < 0) throw InputError("partition: n must be >= 0");
        std::vector<std::vector<std::size_t>> groups;
        for (const auto& g : j.at("groups")) {
            std::vector<std::size_t> grp;
            for (const auto& x : g) {
                if (!x.is_number_integer() || x.get<long long>() < 0) {
                    throw InputError("partition: group entries must be non-negative integers");
                }
                grp.push_back(x.get<std::size_t>());
            }
            groups.push_back(std::move(grp));
        }
        return GroupPartition(static_cast<std::size_t>(n), std::move(groups));
    } catch (const json::exception& e) {
        throw InputError(std::string("partition: ") + e.what());
    }
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

inline json read_json(const std::string& path)
{
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw InputError("'" + path + "': " + e.what());
    }
}

/// Comma-separated rows; blank lines and lines starting with '#' are skipped.
inline mat_t parse_csv_matrix(const std::string& text)
{
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw InputError("csv line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw InputError("csv line " + std::to_string(lineno) + ": ragged row");
        }
        rows.push_back(std::move(row));
    }
    const index_t m = static_cast<index_t>(rows.size());
    const index_t n = m ? static_cast<index_t>(rows.front().size()) : 0;
    mat_t M(m, n);
    for (index_t r = 0; r < m; ++r)
        for (index_t c = 0; c < n; ++c) M(r, c) = rows[r][c];
    return M;
}

inline std::string to_csv(const mat_t& M)
{
    std::ostringstream out;
    out.precision(17);
    for (index_t r = 0; r < M.rows(); ++r) {
        for (index_t c = 0; c < M.cols(); ++c) out << (c ? "," : "") << M(r, c);
        out << '\n';
    }
    return out.str();
}

/// Reads a matrix from CSV, or from the JSON envelope when the path ends in ".json".
inline mat_t load_matrix(const std::string& path)
{
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return matrix_from_json(read_json(path));
    return parse_csv_matrix(read_file(path));
}

/// Single CSV column of +-1 labels.
inline vec_t load_labels(const std::string& path)
{
    const mat_t M = parse_csv_matrix(read_file(path));
    if (M.cols() != 1) throw InputError("labels: expected a single column");
    return M.col(0);
}

inline json optional_json(const std::optional<std::size_t>& x) { return x ? json(*x) : json(nullptr); }
inline json optional_json(const std::optional<double>& x) { return x ? json(round12(*x)) : json(nullptr); }
inline json optional_json(const std::optional<bool>& x) { return x ? json(*x) : json(nullptr); }

inline json trace_record_to_json(const TraceRecord& r)
{
    return json{
        {"round", r.round},
        {"selected", optional_json(r.selected)},
        {"removed", optional_json(r.removed)},
        {"tau", optional_json(r.tau)},
        {"lambda", optional_json(r.lambda)},
        {"group_grad_norms", vector_to_json(r.group_grad_norms, true)},
        {"objective_before", round12(r.objective_before)},
        {"objective_after", round12(r.objective_after)},
        {"in_argmax_set", optional_json(r.in_argmax_set)},
        {"delta_retries", r.delta_retries},
        {"fixed_point", r.fixed_point},
    };
}

/// JSON lines: one record per round.
inline std::string trace_to_jsonl(const SelectionTrace& t)
{
    std::string out;
    for (const auto& r : t.iterations) {
        json j = trace_record_to_json(r);
        j["algorithm"] = t.algorithm;
        out += j.dump() + "\n";
    }
    return out;
}

/// round,selected,tau,objective
inline std::string trace_to_csv(const SelectionTrace& t)
{
    std::ostringstream out;
    out.precision(12);
    out << "round,selected,tau,objective\n";
    for (const auto& r : t.iterations) {
        out << r.round << ',';
        if (r.selected) out << *r.selected;
        out << ',';
        if (r.tau) out << *r.tau;
        out << ',' << r.objective_after << '\n';
    }
    return out.str();
}

} // namespace io
} // namespace groupsparse
