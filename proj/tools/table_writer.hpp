#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace qgs::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

struct RunMetadata {
  std::string command;
  std::string graph_hash;
  std::string version;
  double epsilon = 0;
  std::string mode;
};

std::string format_double(double value);

// Tables follow one another separated by a blank line.
void write_csv(std::ostream& out, const std::vector<Table>& tables);
void write_json(std::ostream& out, const RunMetadata& meta, const std::vector<Table>& tables);

}  // namespace qgs::cli
