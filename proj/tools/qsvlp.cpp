// Command-line front end: bounds, surfaces, sweeps, single estimates, figure
// regeneration, and the scenario invariant report.

#include "qsvlp/crlb.hpp"
#include "qsvlp/figures.hpp"
#include "qsvlp/montecarlo.hpp"
#include "qsvlp/scenario_io.hpp"
#include "qsvlp/validate.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;
using namespace qsvlp;

struct Common {
  std::string scenario;
  std::string out;
  std::uint64_t seed = 1;
  int trials = 200;
  std::vector<std::string> overrides;
  unsigned threads = 0;
};

Scenario load(const Common& c, bool require_integer_cycles = true) {
  LoadedScenario ls = c.scenario.empty()
                          ? override_scenario(reference_scenario(), c.overrides, require_integer_cycles)
                          : load_scenario(c.scenario, c.overrides, require_integer_cycles);
  for (const auto& w : ls.warnings) std::cerr << "warning: " << w << "\n";
  return ls.scenario;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

/// Writes `text` to out/name, or to stdout when no output directory is set.
void emit(const Common& c, const std::string& name, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(c.out);
  const auto path = std::filesystem::path(c.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
  std::cerr << "wrote " << path.string() << "\n";
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("bad sweep value '" + item + "'");
    }
  }
  return v;
}

int cmd_crlb(const Common& c) {
  const Scenario s = load(c, false);
  const FimResult f = fim(s);
  const CrlbResult b = crlb_full(f, s.mode);
  json out;
  out["mode"] = to_string(s.mode);
  out["sqrt_crlb_m"] = std::sqrt(b.mse_bound_trace);
  out["position_variance_bound_m2"] = vec_json(b.per_coordinate);
  out["offset_std_bound_s"] = std::sqrt(b.offset_var_bound);
  json fj = json::array();
  for (int r = 0; r < 4; ++r) fj.push_back({f.fim(r, 0), f.fim(r, 1), f.fim(r, 2), f.fim(r, 3)});
  out["fim"] = fj;
  out["warnings"] = f.warnings;
  emit(c, "crlb.json", out.dump(2) + "\n");
  return 0;
}

int cmd_surface(const Common& c, double spacing) {
  const Scenario s = load(c, false);
  CsvTable t;
  t.columns = {"x_m", "y_m", "sqrt_crlb_m"};
  for (const auto& p : crlb_surface(s, spacing)) t.add_row({p.x, p.y, p.sqrt_crlb});
  emit(c, "surface.csv", format_csv(t));
  return 0;
}

int cmd_sweep(const Common& c, const std::string& axis_name, const std::string& values_text,
              const std::vector<std::string>& estimator_names) {
  const SweepAxis axis = sweep_axis_from_string(axis_name);
  std::vector<EstimatorKind> estimators;
  for (const auto& e : estimator_names) estimators.push_back(estimator_from_string(e));
  const Scenario s = load(c, !estimators.empty());
  const SweepResult r = sweep(s, axis, parse_values(values_text), estimators, c.trials, c.seed, c.threads);
  CsvTable t;
  t.columns = {axis_column(axis),  "sqrt_crlb_m",       "rmse_direct_m", "rmse_two_step_m",
               "failures_direct", "failures_two_step", "unreliable"};
  for (const auto& p : r.points)
    t.add_row({p.value, p.sqrt_crlb, p.rmse_direct, p.rmse_two_step,
               static_cast<double>(p.failures_direct), static_cast<double>(p.failures_two_step),
               p.unreliable ? 1.0 : 0.0});
  emit(c, "sweep.csv", format_csv(t));
  return 0;
}

int cmd_estimate(const Common& c, const std::string& which) {
  const Scenario s = load(c);
  const ReceivedSignalSet rs = synthesize_signals(s, c.seed, 0);
  std::vector<EstimatorKind> kinds;
  if (which == "both")
    kinds = {EstimatorKind::Direct, EstimatorKind::TwoStep};
  else
    kinds = {estimator_from_string(which)};
  json out;
  out["truth"] = vec_json(s.receiver.position);
  out["truth_offset_s"] = s.offset.delta;
  out["seed"] = c.seed;
  for (EstimatorKind k : kinds) {
    const PositionEstimate e = run_estimator(k, rs, s.search);
    json ej;
    ej["position"] = vec_json(e.position);
    ej["error_m"] = (e.position - s.receiver.position).norm();
    if (e.offset) ej["offset_s"] = *e.offset;
    ej["objective"] = e.objective_value;
    ej["evaluations"] = e.diagnostics.evaluations;
    ej["restarts"] = e.diagnostics.restarts;
    ej["converged"] = e.diagnostics.converged;
    ej["multimodal"] = e.diagnostics.multimodal;
    ej["restart_disagreement_m"] = e.diagnostics.restart_disagreement;
    ej["warnings"] = e.diagnostics.warnings;
    out[to_string(k)] = ej;
  }
  emit(c, "estimate.json", out.dump(2) + "\n");
  return 0;
}

int cmd_figure(const Common& c, int id, const std::string& from_meta, double spacing) {
  FigureOptions o;
  o.seed = c.seed;
  o.trials = c.trials;
  o.threads = c.threads;
  o.surface_spacing = spacing;
  if (!from_meta.empty()) {
    std::ifstream in(from_meta);
    if (!in) throw ConfigError("cannot open " + from_meta);
    std::stringstream ss;
    ss << in.rdbuf();
    const json meta = parse_json_text(ss.str(), from_meta);
    id = meta.at("figure").get<int>();
    o.seed = meta.at("seed").get<std::uint64_t>();
    if (meta.at("trials").get<int>() > 0) o.trials = meta.at("trials").get<int>();
    if (meta.contains("surface_spacing_m")) o.surface_spacing = meta.at("surface_spacing_m").get<double>();
    o.base = scenario_from_json(meta.at("scenario")).scenario;
  } else if (!c.scenario.empty() || !c.overrides.empty()) {
    o.base = load(c, false);
  }
  const FigureRun run = run_figure(id, o);
  write_figure(run, c.out.empty() ? std::filesystem::path(".") : std::filesystem::path(c.out));
  std::cerr << "figure " << id << ": " << run.table.rows.size() << " rows in "
            << run.meta["runtime_s"].get<double>() << " s\n";
  return 0;
}

int cmd_validate(const Common& c) {
  const Scenario s = load(c);
  const ValidationReport rep = validate_scenario(s, c.seed);
  emit(c, "validate.json", rep.to_json().dump(2) + "\n");
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-synchronous visible light positioning: bounds, estimators and figures"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  app.add_option("--scenario", c.scenario, "Scenario JSON file (default: built-in reference scenario)");
  app.add_option("--out", c.out, "Output directory (default: stdout, or . for figures)");
  app.add_option("--seed", c.seed, "Base seed for noise realizations");
  app.add_option("--trials", c.trials, "Monte Carlo trials per point")->check(CLI::PositiveNumber);
  app.add_option("--set", c.overrides, "Override a scenario field, key=value with a dotted key");
  app.add_option("--threads", c.threads, "Worker threads (0 = all cores)");

  auto* crlb = app.add_subcommand("crlb", "Fisher information and bounds at the receiver truth");
  double spacing = 0.25;
  auto* surface = app.add_subcommand("surface", "sqrt-CRLB over a floor grid");
  surface->add_option("--spacing", spacing, "Grid spacing, m")->check(CLI::PositiveNumber);
  auto* sweep_cmd = app.add_subcommand("sweep", "sqrt-CRLB and RMSE along one parameter");
  std::string axis = "power";
  std::string values;
  std::vector<std::string> estimators;
  sweep_cmd->add_option("--axis", axis, "power | center_frequency | pulse_duration | tilt_angle");
  sweep_cmd->add_option("--values", values, "Comma-separated sorted values")->required();
  sweep_cmd->add_option("--estimators", estimators, "direct and/or two_step (default: bound only)")
      ->delimiter(',');
  auto* estimate = app.add_subcommand("estimate", "One noise realization through the estimators");
  std::string which = "both";
  estimate->add_option("--estimator", which, "direct | two_step | both");
  auto* figure = app.add_subcommand("figure", "Regenerate the data behind one figure");
  int figure_id = 0;
  std::string from_meta;
  figure->add_option("id", figure_id, "Figure number 1-8")->check(CLI::Range(1, kFigureCount));
  figure->add_option("--from-meta", from_meta, "Rerun exactly as recorded in a figN.meta.json");
  figure->add_option("--spacing", spacing, "Figure 1 grid spacing, m")->check(CLI::PositiveNumber);
  auto* validate = app.add_subcommand("validate", "Run the invariant suite on a scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (crlb->parsed()) return cmd_crlb(c);
    if (surface->parsed()) return cmd_surface(c, spacing);
    if (sweep_cmd->parsed()) return cmd_sweep(c, axis, values, estimators);
    if (estimate->parsed()) return cmd_estimate(c, which);
    if (figure->parsed()) {
      if (figure_id == 0 && from_meta.empty()) throw ConfigError("figure needs an id or --from-meta");
      return cmd_figure(c, figure_id, from_meta, spacing);
    }
    if (validate->parsed()) return cmd_validate(c);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
