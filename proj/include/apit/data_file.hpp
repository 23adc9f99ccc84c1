#pragma once

// Delimited numeric text files: a header row, then one record per line.
// Comma or tab is detected from the header; only '.' is accepted as the
// decimal point.

#include <cstddef>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "apit/errors.hpp"
#include "apit/models.hpp"
#include "apit/uniformity.hpp"

namespace apit {

enum class AngleUnit { rad, deg };

struct DataTable {
  char delimiter = ',';
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  for (std::size_t pos; (pos = line.find(delim)) != std::string_view::npos; line.remove_prefix(pos + 1))
    out.push_back(trim(line.substr(0, pos)));
  out.push_back(trim(line));
  return out;
}

}  // namespace detail

/// Reads a table with exactly `expected_columns` columns (0 = any). Blank
/// lines are skipped; empty, "NA" or non-numeric cells raise ParseError with
/// the 1-based line number.
inline DataTable read_data_table(std::istream& in, std::size_t expected_columns = 0) {
  DataTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::trim(line).empty()) break;
  }
  if (detail::trim(line).empty()) throw ParseError(lineno, "missing header row");
  t.delimiter = line.find('\t') != std::string::npos ? '\t' : ',';
  for (auto name : detail::split(line, t.delimiter)) t.header.emplace_back(name);
  const std::size_t width = t.header.size();
  if (expected_columns != 0 && width != expected_columns)
    throw ParseError(lineno, "expected " + std::to_string(expected_columns) + " column(s), header has " +
                                 std::to_string(width));
  t.columns.assign(width, {});

  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, t.delimiter);
    if (cells.size() != width)
      throw ParseError(lineno, "expected " + std::to_string(width) + " field(s), found " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < width; ++c) {
      if (cells[c].empty() || cells[c] == "NA" || cells[c] == "NaN" || cells[c] == "nan")
        throw ParseError(lineno, "missing value in column '" + t.header[c] + "'");
      const double v = detail::parse_double(cells[c], lineno);
      if (!std::isfinite(v)) throw ParseError(lineno, "non-finite value in column '" + t.header[c] + "'");
      t.columns[c].push_back(v);
    }
  }
  if (t.rows() == 0) throw ParseError(lineno, "no data rows");
  return t;
}

/// Degrees are converted once here; everything downstream is radians.
inline std::vector<double> to_radians(std::vector<double> v, AngleUnit unit) {
  if (unit == AngleUnit::deg)
    for (double& x : v) x *= std::numbers::pi / 180.0;
  return v;
}

inline BivariateSample to_bivariate(const DataTable& t, MarginKind kx, MarginKind ky, AngleUnit unit) {
  if (t.columns.size() != 2) throw DomainError("to_bivariate: need exactly two columns");
  auto x = kx == MarginKind::circular ? to_radians(t.columns[0], unit) : t.columns[0];
  auto y = ky == MarginKind::circular ? to_radians(t.columns[1], unit) : t.columns[1];
  return BivariateSample(std::move(x), std::move(y), kx, ky);
}

/// Writes the sample as "x,y" records; circular margins in radians.
inline void write_data_table(std::ostream& out, const BivariateSample& s, std::string_view name_x = "x",
                             std::string_view name_y = "y") {
  out << name_x << ',' << name_y << '\n';
  for (std::size_t i = 0; i < s.size(); ++i)
    out << detail::format_double(s.x[i]) << ',' << detail::format_double(s.y[i]) << '\n';
}

}  // namespace apit
