#include "hpmr/csv.hpp"

#include "hpmr/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

namespace hpmr::csv {

std::string format(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw NumericalError("cannot format double");
    return std::string(buf, end);
}

double parse_double(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    if (s == "nan" || s == "NaN") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw SchemaError("not a number: '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::size_t Table::column(std::string_view name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw SchemaError("missing column: " + std::string(name));
    return static_cast<std::size_t>(it - columns.begin());
}

double Table::number(std::size_t row, std::string_view name) const {
    return parse_double(rows.at(row).at(column(name)));
}

Table parse(std::istream& in) {
    Table t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::string_view body(line);
            body.remove_prefix(1);
            while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
            auto eq = body.find('=');
            if (eq != std::string_view::npos)
                t.meta.emplace(std::string(body.substr(0, eq)), std::string(body.substr(eq + 1)));
            continue;
        }
        auto cells = split(line);
        std::vector<std::string> row(cells.begin(), cells.end());
        if (!have_header) {
            t.columns = std::move(row);
            have_header = true;
        } else {
            if (row.size() != t.columns.size())
                throw SchemaError("row has " + std::to_string(row.size()) + " cells, header has " +
                                  std::to_string(t.columns.size()));
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return parse(in);
}

void write_meta(std::ostream& out, const Meta& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
}

}  // namespace hpmr::csv
