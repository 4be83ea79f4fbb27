#include "qsvlp/csv.hpp"

#include "qsvlp/common.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qsvlp {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void CsvTable::add_row(std::vector<std::optional<double>> row) {
  if (row.size() != columns.size()) throw ConfigError("CSV row width does not match the header");
  rows.push_back(std::move(row));
}

std::vector<std::optional<double>> CsvTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("no CSV column named " + name);
  const auto k = static_cast<std::size_t>(it - columns.begin());
  std::vector<std::optional<double>> out;
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

std::string format_csv(const CsvTable& t) {
  std::string out;
  for (std::size_t k = 0; k < t.columns.size(); ++k) out += (k ? "," : "") + t.columns[k];
  out += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) out += ",";
      if (r[k]) out += format_value(*r[k]);
    }
    out += "\n";
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << format_csv(t);
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw ConfigError("CSV has no header row");
  t.columns = split_line(line);
  std::size_t lineno = 1;
  while (std::getline(ss, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != t.columns.size())
      throw ConfigError("CSV line " + std::to_string(lineno) + " has the wrong number of cells");
    std::vector<std::optional<double>> row;
    for (const auto& c : cells) {
      if (c.empty()) {
        row.emplace_back();
        continue;
      }
      std::size_t used = 0;
      const double v = std::stod(c, &used);
      if (used != c.size())
        throw ConfigError("CSV line " + std::to_string(lineno) + ": bad number '" + c + "'");
      row.emplace_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace qsvlp
