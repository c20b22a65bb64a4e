#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shield/datamodel.hpp"

namespace shield::csv {

// Dialect: comma separator, UTF-8, '.' decimal point, mandatory header row.
// Fields containing comma, quote or newline are double-quoted on write.

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += ch;
        }
    }
    out.push_back(std::move(field));
    return out;
}

inline std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += '"';
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> find(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }
};

inline Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
        if (first) {
            t.header = split_line(line);
            first = false;
        } else {
            auto fields = split_line(line);
            fields.resize(t.header.size());
            t.rows.push_back(std::move(fields));
        }
    }
    if (first) throw DataError("empty file: " + path);
    return t;
}

inline void write_file(const std::string& path, const Table& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    std::ostringstream ss;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (i) ss << ',';
        ss << quote_field(t.header[i]);
    }
    ss << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) ss << ',';
            ss << quote_field(row[i]);
        }
        ss << '\n';
    }
    out << ss.str();
}

/// Strict numeric parse; empty or malformed cells yield nullopt.
inline std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* begin = s.data();
    const char* end = begin + s.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

/// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace shield::csv
