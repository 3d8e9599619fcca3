#include "srpanova/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "srpanova/error.hpp"

namespace srp::csv {

int Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  Table t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.find('"') != std::string::npos) {
      throw InputError(path.string() + ":" + std::to_string(lineno) +
                       ": quoted fields are not supported");
    }
    if (!have_header) {
      t.header = split(line);
      have_header = true;
      continue;
    }
    t.rows.push_back(Row{lineno, split(line)});
  }
  if (!have_header) throw InputError(path.string() + ":1: empty file, header expected");
  return t;
}

void expect_header(const Table& t, const std::filesystem::path& path,
                   const std::vector<std::string>& required,
                   const std::vector<std::string>& optional) {
  auto describe = [&] {
    std::string s;
    for (const auto& r : required) s += (s.empty() ? "" : ",") + r;
    for (const auto& o : optional) s += "[," + o + "]";
    return s;
  };
  bool ok = t.header.size() >= required.size() &&
            t.header.size() <= required.size() + optional.size();
  for (std::size_t i = 0; ok && i < t.header.size(); ++i) {
    const auto& want = i < required.size() ? required[i] : optional[i - required.size()];
    ok = t.header[i] == want;
  }
  if (!ok) {
    throw InputError(path.string() + ":1: malformed header, expected `" + describe() + "`");
  }
  for (const auto& row : t.rows) {
    if (row.fields.size() != t.header.size()) {
      throw InputError(path.string() + ":" + std::to_string(row.line) + ": expected " +
                       std::to_string(t.header.size()) + " fields, found " +
                       std::to_string(row.fields.size()));
    }
  }
}

long long parse_int(const std::string& s, const std::filesystem::path& path, std::size_t line,
                    std::string_view what) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw InputError(path.string() + ":" + std::to_string(line) + ": invalid " +
                     std::string(what) + " '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line,
                    std::string_view what) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw InputError(path.string() + ":" + std::to_string(line) + ": invalid " +
                     std::string(what) + " '" + s + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, p);
}

}  // namespace srp::csv
