#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace isslab::csv {

/// Round-trippable decimal form (%.17g); "inf", "-inf", "nan" for specials.
std::string number(double v);
/// Parses what number() writes.
double parse_number(std::string_view s);

/// RFC-4180 field quoting: fields holding a comma, quote or line break are
/// wrapped in double quotes with embedded quotes doubled.
std::string quote(std::string_view field);

/// Row-at-a-time writer with CRLF-free "\n" line endings.
class Writer {
public:
    explicit Writer(std::ostream& os) : os_(os) {}

    void row(const std::vector<std::string>& fields);
    Writer& field(std::string_view s);
    Writer& field(double v);
    Writer& field(long long v);
    Writer& field(unsigned long long v);
    Writer& field(int v) { return field(static_cast<long long>(v)); }
    Writer& field(std::size_t v) { return field(static_cast<unsigned long long>(v)); }
    Writer& field(bool v) { return field(std::string_view(v ? "true" : "false")); }
    Writer& field(const char* s) { return field(std::string_view(s)); }
    Writer& field(const std::string& s) { return field(std::string_view(s)); }
    void end_row();

private:
    std::ostream& os_;
    bool first_ = true;
};

using Table = std::vector<std::vector<std::string>>;

/// Parses RFC-4180 text (quoted fields may span lines).
Table read(std::istream& is);
Table read_file(const std::string& path);

/// Index of a header column; throws Error when absent.
std::size_t column(const Table& t, std::string_view name);

}  // namespace isslab::csv
