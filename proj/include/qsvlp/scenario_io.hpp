#pragma once

#include "qsvlp/scenario.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace qsvlp {

struct LoadedScenario {
  Scenario scenario;
  std::vector<std::string> warnings;  // unknown fields and similar
};

/// Builds a scenario from a JSON document (schema in docs/scenario_schema.md).
/// Structural problems (missing or mistyped fields) throw ConfigError naming
/// the field; invariants are not checked here. Relative pulse file paths are
/// resolved against `base_dir`.
LoadedScenario scenario_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = {});

/// Complete document for a scenario; scenario_from_json(scenario_to_json(s))
/// reproduces s exactly.
nlohmann::json scenario_to_json(const Scenario& s);

/// Parses JSON text; syntax errors report line and column.
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

/// Sets a dotted path ("pulse.center_frequency", "leds.0.position") to a value
/// given as text. The text is read as JSON when possible and as a string
/// otherwise. Throws ConfigError when the path does not exist.
void apply_override(nlohmann::json& doc, const std::string& key, const std::string& value);

/// "key=value" form of apply_override.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Reads a scenario file, applies overrides to the complete document, and
/// validates every invariant (ConfigError listing all violations).
LoadedScenario load_scenario(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {},
                             bool require_integer_cycles = true);

/// Same as load_scenario for an in-memory scenario.
LoadedScenario override_scenario(const Scenario& base, const std::vector<std::string>& overrides,
                                 bool require_integer_cycles = true);

}  // namespace qsvlp
