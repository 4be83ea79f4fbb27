#include "qsvlp/figures.hpp"

#include "qsvlp/crlb.hpp"
#include "qsvlp/scenario_io.hpp"

#include <chrono>
#include <fstream>
#include <numbers>

namespace qsvlp {

using nlohmann::json;

namespace {

constexpr double kPowers[] = {0.1, 1.0, 10.0};

std::string power_label(double a) {
  return a == 0.1 ? "A0.1" : a == 1.0 ? "A1" : "A10";
}


Scenario with_carrier(Scenario s, double fc) {
  for (auto& p : s.pulses) p.center_frequency = fc;
  return s;
}

/// sqrt-CRLB series over one axis for each source power (figures 2 and 3).
void crlb_by_power(FigureRun& run, const Scenario& base, SweepAxis axis, const std::string& axis_col) {
  const auto values = figure_axis_values(run.id);
  run.table.columns = {axis_col};
  for (double a : kPowers) run.table.columns.push_back("sqrt_crlb_m_" + power_label(a));
  std::vector<SweepResult> series;
  for (double a : kPowers)
    series.push_back(sweep(apply_axis(base, SweepAxis::Power, a), axis, values, {}, 0, 0));
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::vector<std::optional<double>> row{values[k]};
    for (const auto& s : series) row.push_back(s.points[k].sqrt_crlb);
    run.table.add_row(std::move(row));
  }
  run.meta["axis"] = to_string(axis);
  run.meta["powers_W"] = kPowers;
}

/// RMSE of both estimators against source power (figures 4, 5, 7, 8).
void power_figure(FigureRun& run, Scenario base, double fc, Mode mode, const FigureOptions& o) {
  base = with_carrier(std::move(base), fc);
  base.mode = mode;
  const auto values = figure_axis_values(run.id);
  const SweepResult r = sweep(base, SweepAxis::Power, values,
                              {EstimatorKind::Direct, EstimatorKind::TwoStep}, o.trials, o.seed,
                              o.threads);
  run.table.columns = {"power_W", "sqrt_crlb_m", "rmse_direct_m", "rmse_two_step_m"};
  json failures_direct = json::array();
  json failures_two_step = json::array();
  json unreliable = json::array();
  for (const auto& p : r.points) {
    run.table.add_row({p.value, p.sqrt_crlb, p.rmse_direct, p.rmse_two_step});
    failures_direct.push_back(p.failures_direct);
    failures_two_step.push_back(p.failures_two_step);
    unreliable.push_back(p.unreliable);
  }
  run.meta["axis"] = "power";
  run.meta["center_frequency_Hz"] = fc;
  run.meta["mode"] = to_string(mode);
  run.meta["failures_direct"] = failures_direct;
  run.meta["failures_two_step"] = failures_two_step;
  run.meta["unreliable"] = unreliable;
}

}  // namespace

std::vector<double> figure_axis_values(int id) {
  switch (id) {
    case 2:
      return {1e5, 2e5, 5e5, 1e6, 2e6, 5e6, 1e7, 2e7, 5e7, 1e8, 2e8, 5e8, 1e9};
    case 3:
      return {1e-7, 2e-7, 4e-7, 5e-7, 1e-6, 2e-6, 4e-6, 5e-6, 1e-5};
    case 4:
    case 5:
    case 7:
    case 8:
      return {0.1, 0.3, 1.0, 3.0, 10.0};
    case 6: {
      std::vector<double> v;
      for (int k = 0; k <= 34; ++k) v.push_back(k * std::numbers::pi / 72.0);
      return v;
    }
    default:
      throw ConfigError("figure " + std::to_string(id) + " has no sweep axis");
  }
}

FigureRun run_figure(int id, const FigureOptions& opts) {
  if (id < 1 || id > kFigureCount)
    throw ConfigError("figure id must be between 1 and " + std::to_string(kFigureCount));
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario base = opts.base ? *opts.base : reference_scenario();
  FigureRun run;
  run.id = id;
  run.meta["figure"] = id;
  run.meta["seed"] = opts.seed;
  run.meta["trials"] = 0;

  switch (id) {
    case 1: {
      const auto surface = crlb_surface(base, opts.surface_spacing);
      run.table.columns = {"x_m", "y_m", "sqrt_crlb_m"};
      for (const auto& p : surface) run.table.add_row({p.x, p.y, p.sqrt_crlb});
      run.meta["surface_spacing_m"] = opts.surface_spacing;
      break;
    }
    case 2:
      crlb_by_power(run, base, SweepAxis::CenterFrequency, "center_frequency_Hz");
      break;
    case 3:
      crlb_by_power(run, base, SweepAxis::PulseDuration, "pulse_duration_s");
      break;
    case 4:
      power_figure(run, base, 1e8, Mode::TwoD, opts);
      run.meta["trials"] = opts.trials;
      break;
    case 5:
      power_figure(run, base, 1e7, Mode::TwoD, opts);
      run.meta["trials"] = opts.trials;
      break;
    case 6: {
      const auto values = figure_axis_values(6);
      const auto lo = sweep(with_carrier(base, 1e7), SweepAxis::TiltAngle, values, {}, 0, 0);
      const auto hi = sweep(with_carrier(base, 1e8), SweepAxis::TiltAngle, values, {}, 0, 0);
      run.table.columns = {"theta_rad", "sqrt_crlb_m_fc1e7", "sqrt_crlb_m_fc1e8"};
      for (std::size_t k = 0; k < values.size(); ++k)
        run.table.add_row({values[k], lo.points[k].sqrt_crlb, hi.points[k].sqrt_crlb});
      run.meta["axis"] = "tilt_angle";
      break;
    }
    case 7:
      power_figure(run, base, 1e8, Mode::ThreeD, opts);
      run.meta["trials"] = opts.trials;
      break;
    case 8:
      power_figure(run, base, 1e7, Mode::ThreeD, opts);
      run.meta["trials"] = opts.trials;
      break;
    default:
      break;
  }
  run.meta["columns"] = run.table.columns;
  run.meta["scenario"] = scenario_to_json(base);
  run.meta["runtime_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

void write_figure(const FigureRun& run, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string stem = "fig" + std::to_string(run.id);
  write_csv(out_dir / (stem + ".csv"), run.table);
  std::ofstream meta(out_dir / (stem + ".meta.json"));
  if (!meta) throw ConfigError("cannot write " + (out_dir / (stem + ".meta.json")).string());
  meta << run.meta.dump(2) << "\n";
}

}  // namespace qsvlp
