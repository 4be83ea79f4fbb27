// Python bindings. Scenarios cross the boundary as JSON text (the documented
// scenario schema); the qsvlp package converts to and from dicts.

#include "qsvlp/crlb.hpp"
#include "qsvlp/estimators.hpp"
#include "qsvlp/figures.hpp"
#include "qsvlp/montecarlo.hpp"
#include "qsvlp/scenario_io.hpp"
#include "qsvlp/validate.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace qsvlp;
using nlohmann::json;

namespace {

Scenario parse(const std::string& text, const std::vector<std::string>& overrides, bool require_int) {
  const Scenario s = scenario_from_json(parse_json_text(text, "<scenario>")).scenario;
  return override_scenario(s, overrides, require_int).scenario;
}

py::dict trials_dict(const TrialSummary& r) {
  py::list errors;
  py::list failures;
  for (const auto& t : r.trials) {
    if (t.error)
      errors.append(py::make_tuple(t.error->x(), t.error->y(), t.error->z()));
    else
      errors.append(py::none());
    failures.append(t.failure);
  }
  py::dict d;
  d["rmse"] = r.rmse;
  d["failures"] = r.failures;
  d["errors"] = errors;
  d["messages"] = failures;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quasi-synchronous visible light positioning core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<RankDeficientError>(m, "RankDeficientError", PyExc_ArithmeticError);
  py::register_exception<EstimationError>(m, "EstimationError", PyExc_RuntimeError);

  m.def("default_scenario", [] { return scenario_to_json(reference_scenario()).dump(); },
        "Built-in reference scenario as JSON text.");
  m.def("tilted_scenario", [](double theta) { return scenario_to_json(tilted_scenario(theta)).dump(); },
        py::arg("theta"));
  m.def("normalize_scenario",
        [](const std::string& text, const std::vector<std::string>& overrides) {
          return scenario_to_json(parse(text, overrides, false)).dump();
        },
        py::arg("scenario"), py::arg("overrides") = std::vector<std::string>{},
        "Complete, validated scenario document after applying key=value overrides.");

  m.def("energy_integrals",
        [](double amplitude, double duration, double center_frequency) {
          const EnergyIntegrals e =
              energy_integrals(PulseSpec::raised_cosine(amplitude, duration, center_frequency));
          return py::make_tuple(e.e1, e.e2, e.e3);
        },
        py::arg("amplitude"), py::arg("duration"), py::arg("center_frequency"),
        "(E1, E2, E3) of the raised-cosine pulse.");

  m.def("fim", [](const std::string& text) { return Eigen::Matrix4d(fim(parse(text, {}, false)).fim); },
        py::arg("scenario"), "4x4 Fisher information for [x, y, z, offset].");
  m.def("fim_qs", [](const std::string& text) { return Eigen::Matrix3d(fim_qs(parse(text, {}, false))); },
        py::arg("scenario"));
  m.def("sqrt_crlb", [](const std::string& text) { return sqrt_crlb(parse(text, {}, false)); },
        py::arg("scenario"));
  m.def("crlb_surface",
        [](const std::string& text, double spacing) {
          std::vector<std::tuple<double, double, std::optional<double>>> out;
          for (const auto& p : crlb_surface(parse(text, {}, false), spacing))
            out.emplace_back(p.x, p.y, p.sqrt_crlb);
          return out;
        },
        py::arg("scenario"), py::arg("spacing"));

  m.def("estimate",
        [](const std::string& text, const std::string& estimator, std::uint64_t seed, std::uint64_t trial) {
          const Scenario s = parse(text, {}, true);
          const EstimatorKind kind = estimator_from_string(estimator);
          PositionEstimate e;
          {
            py::gil_scoped_release release;
            e = run_estimator(kind, synthesize_signals(s, seed, trial), s.search);
          }
          py::dict d;
          d["position"] = py::make_tuple(e.position.x(), e.position.y(), e.position.z());
          d["offset"] = e.offset;
          d["objective"] = e.objective_value;
          d["multimodal"] = e.diagnostics.multimodal;
          d["warnings"] = e.diagnostics.warnings;
          return d;
        },
        py::arg("scenario"), py::arg("estimator") = "two_step", py::arg("seed") = 1, py::arg("trial") = 0);

  m.def("run_trials",
        [](const std::string& text, const std::string& estimator, int n, std::uint64_t seed,
           unsigned threads) {
          const Scenario s = parse(text, {}, true);
          const EstimatorKind kind = estimator_from_string(estimator);
          TrialSummary r;
          {
            py::gil_scoped_release release;
            r = run_trials(s, kind, n, seed, threads);
          }
          return trials_dict(r);
        },
        py::arg("scenario"), py::arg("estimator"), py::arg("trials"), py::arg("seed") = 1,
        py::arg("threads") = 0);

  m.def("validate",
        [](const std::string& text, std::uint64_t seed) {
          return validate_scenario(parse(text, {}, true), seed).to_json().dump();
        },
        py::arg("scenario"), py::arg("seed") = 1, "Invariant report as JSON text.");

  m.def("run_figure",
        [](int id, std::uint64_t seed, int trials, double spacing, unsigned threads) {
          FigureOptions o;
          o.seed = seed;
          o.trials = trials;
          o.surface_spacing = spacing;
          o.threads = threads;
          FigureRun run;
          {
            py::gil_scoped_release release;
            run = run_figure(id, o);
          }
          return py::make_tuple(format_csv(run.table), run.meta.dump());
        },
        py::arg("id"), py::arg("seed") = 1, py::arg("trials") = 200, py::arg("spacing") = 0.25,
        py::arg("threads") = 0, "(CSV text, metadata JSON text) of one figure.");
}
