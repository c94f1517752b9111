#include "table_writer.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace qgs::cli {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value == 0 ? 0.0 : value);
  return buffer;
}

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

std::string csv_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return csv_field(std::get<std::string>(cell));
}

nlohmann::ordered_json json_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return std::isfinite(*d) ? nlohmann::ordered_json(*d) : nullptr;
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  return std::get<std::string>(cell);
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<Table>& tables) {
  for (std::size_t t = 0; t < tables.size(); ++t) {
    if (t) out << '\n';
    const auto& table = tables[t];
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << csv_field(table.columns[c]);
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
      out << '\n';
    }
  }
}

void write_json(std::ostream& out, const RunMetadata& meta, const std::vector<Table>& tables) {
  nlohmann::ordered_json doc;
  doc["metadata"] = {{"command", meta.command},
                     {"graph_hash", meta.graph_hash},
                     {"version", meta.version},
                     {"epsilon", meta.epsilon},
                     {"mode", meta.mode}};
  auto& body = doc["tables"] = nlohmann::ordered_json::object();
  for (const auto& table : tables) {
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
      nlohmann::ordered_json record;
      for (std::size_t c = 0; c < row.size(); ++c) record[table.columns[c]] = json_cell(row[c]);
      rows.push_back(std::move(record));
    }
    body[table.name] = std::move(rows);
  }
  out << doc.dump(2) << '\n';
}

}  // namespace qgs::cli
