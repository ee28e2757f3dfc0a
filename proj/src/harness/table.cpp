#include "ridgesketch/harness/table.hpp"

#include <charconv>
#include <cmath>

#include <json.hpp>

#include "ridgesketch/errors.hpp"

namespace ridgesketch::harness {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("Table::add_row: row width does not match the header");
  }
  rows.push_back(std::move(row));
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw ValidationError("table has no column '" + name + "'");
}

double Table::number(std::size_t row, const std::string& column) const {
  const Cell& c = rows.at(row).at(column_index(column));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  throw ValidationError("column '" + column + "' is not numeric");
}

std::string Table::text(std::size_t row, const std::string& column) const {
  return format_cell(rows.at(row).at(column_index(column)));
}

std::string format_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    if (std::isnan(*d)) return "nan";
    if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), *d);
    return std::string(buf, res.ptr);
  }
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

std::string meta_line(const TableMeta& meta) {
  return "# config_hash=" + meta.config_hash + " seed=" + std::to_string(meta.seed) +
         " version=" + meta.version + " kind=" + meta.kind;
}

void write_csv(std::ostream& os, const Table& table, const TableMeta& meta) {
  os << meta_line(meta) << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) os << ',';
    os << table.columns[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << format_cell(row[i]);
    }
    os << '\n';
  }
}

void write_json(std::ostream& os, const Table& table, const TableMeta& meta) {
  nlohmann::ordered_json doc;
  doc["meta"] = {{"config_hash", meta.config_hash},
                 {"seed", meta.seed},
                 {"version", meta.version},
                 {"kind", meta.kind}};
  doc["columns"] = table.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const Cell& c = row[i];
      if (const auto* d = std::get_if<double>(&c)) {
        obj[table.columns[i]] = std::isfinite(*d) ? nlohmann::ordered_json(*d) : nullptr;
      } else if (const auto* n = std::get_if<std::int64_t>(&c)) {
        obj[table.columns[i]] = *n;
      } else {
        obj[table.columns[i]] = std::get<std::string>(c);
      }
    }
    rows.push_back(std::move(obj));
  }
  doc["rows"] = std::move(rows);
  os << doc.dump(2) << '\n';
}

}  // namespace ridgesketch::harness
