#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace quasilab {

using Cell = std::variant<std::int64_t, double, std::string>;

/// Column-named rows plus free-form metadata. Reals are printed with 17
/// significant digits so that equal doubles give equal text.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  void add_row(std::vector<Cell> row);
  void add_metadata(std::string key, std::string value) {
    metadata.emplace_back(std::move(key), std::move(value));
  }
};

/// %.17g, with "inf", "-inf" and "nan" for non-finite values.
std::string format_real(double x);
std::string format_cell(const Cell& c);

/// Metadata as leading "# key=value" lines, then a header and one line per row.
void write_csv(std::ostream& out, const Table& table);
/// {"metadata": {...}, "columns": [...], "rows": [[...], ...]}.
void write_json(std::ostream& out, const Table& table);

enum class OutputFormat { csv, json };
OutputFormat parse_output_format(const std::string& name);
void write_table(std::ostream& out, const Table& table, OutputFormat format);

}  // namespace quasilab
