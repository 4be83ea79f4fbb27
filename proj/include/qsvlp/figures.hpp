#pragma once

#include "qsvlp/csv.hpp"
#include "qsvlp/montecarlo.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"

namespace qsvlp {

struct FigureOptions {
  std::uint64_t seed = 1;
  int trials = 200;
  unsigned threads = 0;               // 0 = hardware concurrency
  double surface_spacing = 0.25;      // m, figure 1
  std::optional<Scenario> base;       // reference_scenario() when empty
};

struct FigureRun {
  int id = 0;
  CsvTable table;
  nlohmann::json meta;  // seeds, trial counts, axis, scenario, runtime
};

/// Number of figures that can be regenerated (1..8).
inline constexpr int kFigureCount = 8;

/// Parameter values on the horizontal axis of a sweep figure (2..8).
std::vector<double> figure_axis_values(int id);

/// Runs the preconfigured surface or sweep of one figure. Throws ConfigError
/// for an unknown id.
FigureRun run_figure(int id, const FigureOptions& opts);

/// Writes figN.csv and figN.meta.json into `out_dir` (created if missing).
void write_figure(const FigureRun& run, const std::filesystem::path& out_dir);

}  // namespace qsvlp
