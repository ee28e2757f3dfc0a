#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace ridgesketch::harness {

using Cell = std::variant<double, std::int64_t, std::string>;

/// Flat result table. Doubles are written in shortest round-trip form so a
/// rerun with the same config is byte-identical.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::size_t column_index(const std::string& name) const;
  double number(std::size_t row, const std::string& column) const;
  std::string text(std::size_t row, const std::string& column) const;
};

/// Header comment carried by every emitted table.
struct TableMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::string kind;
};

std::string format_cell(const Cell& cell);
std::string meta_line(const TableMeta& meta);

void write_csv(std::ostream& os, const Table& table, const TableMeta& meta);
void write_json(std::ostream& os, const Table& table, const TableMeta& meta);

}  // namespace ridgesketch::harness
