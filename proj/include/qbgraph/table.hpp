#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qbgraph/errors.hpp"
#include "qbgraph/text.hpp"

namespace qbg {

inline constexpr int kMetadataSchemaVersion = 1;

#ifdef QBGRAPH_VERSION
inline constexpr const char* kVersion = QBGRAPH_VERSION;
#else
inline constexpr const char* kVersion = "0.1.0";
#endif

using Cell = std::variant<std::int64_t, double, std::string>;

/// Column-named rows. Doubles are written with 12 significant digits; NaN
/// becomes an empty CSV field and a JSON null.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw InputError("table '" + name + "': row width mismatch");
    rows.push_back(std::move(row));
  }
};

namespace detail {

inline std::string csv_field(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return std::isnan(*d) ? "" : fmt_val(*d);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

inline nlohmann::ordered_json json_value(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return nullptr;
    // Round through the CSV rendering so both formats carry the same digits.
    return std::stod(fmt_val(*d));
  }
  return std::get<std::string>(c);
}

}  // namespace detail

inline void write_csv(std::ostream& out, const Table& t) {
  out << join(t.columns, ",", [](const std::string& s) { return detail::csv_field(Cell{s}); }) << "\n";
  for (const auto& row : t.rows) out << join(row, ",", detail::csv_field) << "\n";
}

inline nlohmann::ordered_json to_json(const Table& t) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = detail::json_value(row[i]);
    arr.push_back(std::move(obj));
  }
  return arr;
}

inline std::string render(const Table& t, const std::string& format) {
  std::ostringstream out;
  if (format == "csv") {
    write_csv(out, t);
  } else if (format == "json") {
    out << to_json(t).dump(2) << "\n";
  } else {
    throw InputError("format must be csv or json, got '" + format + "'");
  }
  return out.str();
}

/// Writes `<dir>/<name>.<format>` and returns the file name.
inline std::string write_table(const std::filesystem::path& dir, const Table& t, const std::string& format) {
  std::filesystem::create_directories(dir);
  const std::string file = t.name + "." + format;
  std::ofstream out(dir / file, std::ios::binary);
  if (!out) throw InputError("cannot write " + (dir / file).string());
  out << render(t, format);
  return file;
}

}  // namespace qbg
