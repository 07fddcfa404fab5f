#include "metaadapt/table.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "metaadapt/concern_io.hpp"
#include "metaadapt/errors.hpp"
#include "metaadapt/mdp_io.hpp"

namespace metaadapt {

namespace {

std::string format_cell(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(cell));
  return buf;
}

Cell parse_cell(const std::string& field) {
  long long i = 0;
  const char* end = field.data() + field.size();
  if (auto [p, ec] = std::from_chars(field.data(), end, i); ec == std::errc() && p == end && !field.empty()) return i;
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(field.data(), end, d); ec == std::errc() && p == end && !field.empty()) return d;
  return field;
}

struct Field {
  std::string text;
  bool quoted = false;
};

// Fields containing a separator, quote or line break are quoted, with
// embedded quotes doubled.
std::string quote_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<Field> split_line(const std::string& line) {
  std::vector<Field> out(1);
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c != '"') {
        out.back().text += c;
      } else if (i + 1 < line.size() && line[i + 1] == '"') {
        out.back().text += '"';
        ++i;
      } else {
        in_quotes = false;
      }
    } else if (c == '"') {
      in_quotes = true;
      out.back().quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back().text += c;
    }
  }
  if (in_quotes) throw ParseError("table row has an unterminated quote");
  return out;
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw ConfigurationError("table row has the wrong number of cells");
  rows.push_back(std::move(row));
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw ParseError("table has no column '" + std::string(name) + "'");
}

double Table::number(std::size_t row, std::string_view name) const {
  const Cell& c = rows.at(row).at(column(name));
  if (const auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&c)) return *d;
  throw ParseError("column '" + std::string(name) + "' is not numeric");
}

std::string Table::text(std::size_t row, std::string_view name) const {
  return format_cell(rows.at(row).at(column(name)));
}

TableFormat parse_table_format(std::string_view name) {
  if (name == "csv") return TableFormat::csv;
  if (name == "structured") return TableFormat::structured;
  throw ConfigurationError("unknown format '" + std::string(name) + "'");
}

std::string extension(TableFormat format) { return format == TableFormat::csv ? ".csv" : ".json"; }

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + quote_field(table.columns[i]);
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + quote_field(format_cell(row[i]));
    out += '\n';
  }
  return out;
}

std::string to_structured(const Table& table) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit([&](const auto& v) { obj[table.columns[i]] = v; }, row[i]);
    }
    rows.push_back(std::move(obj));
  }
  nlohmann::ordered_json doc{{"columns", table.columns}, {"rows", std::move(rows)}};
  return doc.dump(2) + "\n";
}

Table parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  Table table;
  if (!std::getline(in, line)) throw ParseError("empty table");
  for (auto& f : split_line(line)) table.columns.push_back(std::move(f.text));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != table.columns.size()) throw ParseError("table row has the wrong number of fields");
    std::vector<Cell> row;
    for (const auto& f : fields) row.push_back(f.quoted ? Cell{f.text} : parse_cell(f.text));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table parse_structured(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed table: ") + e.what());
  }
  if (!doc.contains("columns") || !doc.contains("rows")) throw ParseError("table: missing key 'columns' or 'rows'");
  Table table;
  table.columns = doc.at("columns").get<std::vector<std::string>>();
  for (const auto& obj : doc.at("rows")) {
    std::vector<Cell> row;
    for (const auto& c : table.columns) {
      if (!obj.contains(c)) throw ParseError("table: row is missing key '" + c + "'");
      const auto& v = obj.at(c);
      if (v.is_number_integer()) {
        row.emplace_back(v.get<long long>());
      } else if (v.is_number()) {
        row.emplace_back(v.get<double>());
      } else {
        row.emplace_back(v.get<std::string>());
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::filesystem::path write_table(const Table& table, const std::filesystem::path& dir, const std::string& stem,
                                  TableFormat format) {
  const auto path = dir / (stem + extension(format));
  write_text_file(path, format == TableFormat::csv ? to_csv(table) : to_structured(table));
  return path;
}

Table read_table(const std::filesystem::path& dir, const std::string& stem) {
  if (const auto csv = dir / (stem + ".csv"); std::filesystem::exists(csv)) return parse_csv(read_text_file(csv));
  if (const auto js = dir / (stem + ".json"); std::filesystem::exists(js)) {
    return parse_structured(read_text_file(js));
  }
  throw ParseError("no " + stem + " table in " + dir.string());
}

}  // namespace metaadapt
