#include "qsvlp/csv.hpp"
#include "qsvlp/figures.hpp"
#include "qsvlp/scenario_io.hpp"
#include "qsvlp/validate.hpp"

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace qsvlp;
namespace fs = std::filesystem;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qsvlp_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

bool contains(const std::string& text, const std::string& part) {
  return text.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("bundled reference scenario equals the built-in default") {
  const LoadedScenario ls = load_scenario(fs::path(QSVLP_DATA_DIR) / "reference_scenario.json");
  CHECK(ls.warnings.empty());
  CHECK(scenario_to_json(ls.scenario) == scenario_to_json(reference_scenario()));
}

TEST_CASE("scenario JSON round-trips") {
  Scenario s = reference_scenario();
  s.mode = Mode::ThreeD;
  s.leds[2].lambertian_order = 2.5;
  s.pulses[1] = PulseSpec::tabulated({0.0, 5e-7, 1e-6}, {0.0, 1.0, 0.0});
  s.search.direct_starts = 3;
  const nlohmann::json doc = scenario_to_json(s);
  const Scenario back = scenario_from_json(doc).scenario;
  CHECK(scenario_to_json(back) == doc);
  CHECK(back.pulses[1].kind == PulseKind::Tabulated);
}

TEST_CASE("invalid scenarios name the offending field") {
  const nlohmann::json base = scenario_to_json(reference_scenario());

  nlohmann::json d = base;
  d["leds"][2]["normal"] = {0.0, 0.0, -2.0};
  const std::string m1 = message_of([&] { override_scenario(scenario_from_json(d).scenario, {}); });
  CHECK(contains(m1, "leds[2]"));
  CHECK(contains(m1, "normal not unit"));

  d = base;
  d["noise"].erase("psd");
  CHECK(contains(message_of([&] { scenario_from_json(d); }), "missing field 'noise.psd'"));

  d = base;
  d["extra"] = 1;
  const LoadedScenario ls = scenario_from_json(d);
  REQUIRE(ls.warnings.size() == 1);
  CHECK(contains(ls.warnings[0], "unknown field 'extra'"));

  CHECK(contains(message_of([] { parse_json_text("{\n  \"a\": ,\n}", "x.json"); }), "x.json:2:"));
}

TEST_CASE("overrides edit the complete document") {
  const Scenario s = reference_scenario();
  const Scenario o = override_scenario(s, {"pulse.center_frequency=1e7", "leds.1.position=[6,10,4]",
                                           "mode=three_d"})
                         .scenario;
  for (const auto& p : o.pulses) CHECK(p.center_frequency == 1e7);
  CHECK(o.leds[1].position.isApprox(Vec3(6, 10, 4)));
  CHECK(o.mode == Mode::ThreeD);
  CHECK_THROWS_AS(override_scenario(s, {"pulse.colour=1"}), ConfigError);
  CHECK_THROWS_AS(override_scenario(s, {"leds.9.position=[1,1,4]"}), ConfigError);
  CHECK_THROWS_AS(override_scenario(s, {"noise.psd"}), ConfigError);
  // Invariants are checked after overriding.
  CHECK_THROWS_AS(override_scenario(s, {"noise.psd=-1"}), ConfigError);
}

TEST_CASE("CSV round-trip is exact and keeps missing cells") {
  CsvTable t;
  t.columns = {"a", "b"};
  t.add_row({0.1, std::nullopt});
  t.add_row({1.0 / 3.0, 6.02214076e23});
  t.add_row({-2.5e-300, 0.0});
  const CsvTable back = parse_csv(format_csv(t));
  CHECK(back.columns == t.columns);
  REQUIRE(back.rows.size() == 3);
  CHECK_FALSE(back.rows[0][1].has_value());
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(back.rows[r][c] == t.rows[r][c]);
  CHECK(back.column("b")[1] == 6.02214076e23);
  CHECK_THROWS(t.add_row({1.0}));
}

TEST_CASE("validate passes on the default and reports degenerate cases") {
  const ValidationReport ok = validate_scenario(reference_scenario());
  CHECK(ok.passed());
  for (const auto& c : ok.checks)
    if (c.name != "synchronous_equivalence") CHECK(c.status == CheckStatus::Pass);

  Scenario quiet = reference_scenario();
  quiet.noise.psd = 0.0;
  const ValidationReport q = validate_scenario(quiet);
  CHECK(q.passed());
  int skipped = 0;
  for (const auto& c : q.checks) skipped += c.status == CheckStatus::Skipped;
  CHECK(skipped >= 1);

  Scenario one = reference_scenario();
  one.leds.resize(1);
  one.set_pulse(one.pulses.front());
  const ValidationReport r = validate_scenario(one);
  bool rank_reported = false;
  for (const auto& c : r.checks)
    if (c.name == "information_rank") rank_reported = c.status != CheckStatus::Pass;
  CHECK(rank_reported);
  CHECK(r.to_json()["checks"].is_array());
}

TEST_CASE("figure runs are bitwise reproducible") {
  FigureOptions o;
  o.trials = 3;
  o.threads = 2;
  o.surface_spacing = 1.5;
  for (int id : {1, 4}) {
    const FigureRun a = run_figure(id, o);
    o.threads = 1;
    const FigureRun b = run_figure(id, o);
    CHECK(format_csv(a.table) == format_csv(b.table));
    const fs::path dir = temp_dir("fig" + std::to_string(id));
    write_figure(a, dir);
    const fs::path csv = dir / ("fig" + std::to_string(id) + ".csv");
    CHECK(fs::exists(csv));
    CHECK(fs::exists(dir / ("fig" + std::to_string(id) + ".meta.json")));
    std::ifstream in(csv);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(text.str() == format_csv(a.table));
    fs::remove_all(dir);
  }
  CHECK(run_figure(4, o).table.columns ==
        std::vector<std::string>{"power_W", "sqrt_crlb_m", "rmse_direct_m", "rmse_two_step_m"});
  CHECK_THROWS_AS(run_figure(9, o), ConfigError);
  CHECK(figure_axis_values(6).size() == 35);
}
