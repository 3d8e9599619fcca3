#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace srp::csv {

/// One data row with its 1-based line number in the source file.
struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Plain comma-separated table: no quoting, header on the first line.
struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column index by name, or -1.
  int column(std::string_view name) const;
};

std::vector<std::string> split(std::string_view line);

/// Reads a table; blank lines are skipped, CR line endings and a UTF-8 BOM tolerated.
Table read(const std::filesystem::path& path);

/// Throws InputError unless the header starts with exactly `required` followed by
/// at most the names in `optional` (in order).
void expect_header(const Table& t, const std::filesystem::path& path,
                   const std::vector<std::string>& required,
                   const std::vector<std::string>& optional = {});

long long parse_int(const std::string& s, const std::filesystem::path& path, std::size_t line,
                    std::string_view what);
double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line,
                    std::string_view what);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);
/// Fixed-point with `digits` decimals.
std::string format_fixed(double v, int digits);

}  // namespace srp::csv
