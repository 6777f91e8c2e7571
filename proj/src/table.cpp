#include "quasilab/table.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "quasilab/errors.hpp"

namespace quasilab {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw ValidationError("Table::add_row: expected " + std::to_string(columns.size()) +
                          " cells, got " + std::to_string(row.size()));
  rows.push_back(std::move(row));
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
  return std::get<std::string>(c);
}

void write_csv(std::ostream& out, const Table& table) {
  for (const auto& [k, v] : table.metadata) out << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
}

void write_json(std::ostream& out, const Table& table) {
  nlohmann::ordered_json doc;
  doc["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : table.metadata) doc["metadata"][k] = v;
  doc["columns"] = table.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& c : row) {
      if (const auto* i = std::get_if<std::int64_t>(&c)) {
        r.push_back(*i);
      } else if (const auto* d = std::get_if<double>(&c)) {
        // JSON has no infinities; those go out as strings.
        if (std::isfinite(*d))
          r.push_back(*d);
        else
          r.push_back(format_real(*d));
      } else {
        r.push_back(std::get<std::string>(c));
      }
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  out << doc.dump(2) << '\n';
}

OutputFormat parse_output_format(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ValidationError("unknown output format '" + name + "' (expected csv or json)");
}

void write_table(std::ostream& out, const Table& table, OutputFormat format) {
  if (format == OutputFormat::csv)
    write_csv(out, table);
  else
    write_json(out, table);
}

}  // namespace quasilab
