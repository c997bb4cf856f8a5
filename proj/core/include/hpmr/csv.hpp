#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hpmr::csv {

/// Shortest string that parses back to the same double.
std::string format(double v);
double parse_double(std::string_view s);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Header block lines of the form "# key=value".
using Meta = std::map<std::string, std::string>;

struct Table {
    Meta meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Index of a column; SchemaError naming it when absent.
    std::size_t column(std::string_view name) const;
    double number(std::size_t row, std::string_view name) const;
};

Table read(const std::filesystem::path& path);
Table parse(std::istream& in);

void write_meta(std::ostream& out, const Meta& meta);

}  // namespace hpmr::csv
