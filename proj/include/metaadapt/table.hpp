#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace metaadapt {

using Cell = std::variant<std::string, long long, double>;

/// Small column-named table used for every emitted report.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
  std::string text(std::size_t row, std::string_view name) const;
};

enum class TableFormat { csv, structured };

TableFormat parse_table_format(std::string_view name);
/// ".csv" or ".json".
std::string extension(TableFormat format);

std::string to_csv(const Table& table);
/// JSON document {"columns": [...], "rows": [{column: value}, ...]}.
std::string to_structured(const Table& table);

Table parse_csv(std::string_view text);
Table parse_structured(std::string_view text);

/// Writes `<stem><ext>` under `dir` and returns the path.
std::filesystem::path write_table(const Table& table, const std::filesystem::path& dir, const std::string& stem,
                                  TableFormat format);
/// Reads `<stem>.csv` or `<stem>.json` from `dir`, whichever exists.
Table read_table(const std::filesystem::path& dir, const std::string& stem);

}  // namespace metaadapt
