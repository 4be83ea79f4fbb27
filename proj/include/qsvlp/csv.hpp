#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qsvlp {

/// Numeric table with named columns. Missing values (failed points) are
/// written as empty cells.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;

  void add_row(std::vector<std::optional<double>> row);
  std::vector<std::optional<double>> column(const std::string& name) const;
};

/// Values use 17 significant digits, so reading back reproduces them exactly.
std::string format_csv(const CsvTable& t);
void write_csv(const std::filesystem::path& path, const CsvTable& t);

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace qsvlp
