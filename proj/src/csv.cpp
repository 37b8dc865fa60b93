#include "isslab/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "isslab/errors.hpp"

namespace isslab::csv {

std::string number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_number(std::string_view s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size())
        throw Error("not a number in CSV: '" + tmp + "'");
    return v;
}

std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

void Writer::row(const std::vector<std::string>& fields) {
    for (const auto& f : fields) field(std::string_view(f));
    end_row();
}

Writer& Writer::field(std::string_view s) {
    if (!first_) os_ << ',';
    os_ << quote(s);
    first_ = false;
    return *this;
}

Writer& Writer::field(double v) { return field(std::string_view(number(v))); }
Writer& Writer::field(long long v) { return field(std::string_view(std::to_string(v))); }
Writer& Writer::field(unsigned long long v) { return field(std::string_view(std::to_string(v))); }

void Writer::end_row() {
    os_ << '\n';
    first_ = true;
}

Table read(std::istream& is) {
    Table table;
    std::vector<std::string> row;
    std::string cur;
    bool in_quotes = false;
    bool any = false;
    char ch;
    while (is.get(ch)) {
        any = true;
        if (in_quotes) {
            if (ch == '"') {
                if (is.peek() == '"') {
                    is.get(ch);
                    cur += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                cur += ch;
            }
            continue;
        }
        if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            row.push_back(std::move(cur));
            cur.clear();
        } else if (ch == '\n') {
            row.push_back(std::move(cur));
            cur.clear();
            table.push_back(std::move(row));
            row.clear();
            any = false;
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    if (in_quotes) throw Error("unterminated quoted CSV field");
    if (any) {
        row.push_back(std::move(cur));
        table.push_back(std::move(row));
    }
    return table;
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    return read(in);
}

std::size_t column(const Table& t, std::string_view name) {
    if (t.empty()) throw Error("empty CSV table");
    for (std::size_t i = 0; i < t.front().size(); ++i)
        if (t.front()[i] == name) return i;
    throw Error("CSV column '" + std::string(name) + "' not found");
}

}  // namespace isslab::csv
