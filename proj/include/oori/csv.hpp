#pragma once
// Minimal CSV plumbing: shortest round-trip number formatting and a
// line-numbered reader for the flat numeric tables this project uses.

#include <charconv>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "oori/errors.hpp"

namespace oori::csv {

/// Shortest representation that parses back to the same double.
inline std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, end);
}

inline std::string fmt(long long v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }

  [[nodiscard]] std::size_t require(std::string_view name) const {
    if (auto c = column(name)) return *c;
    throw DataError(source + ": missing column '" + std::string(name) + "'");
  }

  [[noreturn]] void fail(std::size_t row, const std::string& what) const {
    throw DataError(source + ":" + std::to_string(line_numbers.at(row)) + ": " + what);
  }

  [[nodiscard]] double number(std::size_t row, std::size_t col) const {
    const std::string& s = rows[row][col];
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      fail(row, "expected a number in column '" + header[col] + "', got '" + s + "'");
    }
    return v;
  }

  [[nodiscard]] long long integer(std::size_t row, std::size_t col) const {
    const std::string& s = rows[row][col];
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      fail(row, "expected an integer in column '" + header[col] + "', got '" + s + "'");
    }
    return v;
  }

  [[nodiscard]] bool empty_cell(std::size_t row, std::size_t col) const {
    return rows[row][col].empty();
  }
};

inline Table read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  Table t;
  t.source = path;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    for (auto sv : split(line)) cells.emplace_back(sv);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(t.header.size()) + " fields, got " +
                      std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(lineno);
  }
  if (t.header.empty()) throw DataError(path + ": empty file");
  return t;
}

}  // namespace oori::csv
