#include "qsvlp/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace qsvlp {

using nlohmann::json;

namespace {

/// Field access with the dotted path of the current object for messages,
/// and a record of which keys were consumed.
class Fields {
 public:
  Fields(const json& obj, std::string path, std::vector<std::string>& warnings)
      : obj_(obj), path_(std::move(path)), warnings_(warnings) {
    if (!obj_.is_object()) throw ConfigError("field '" + display() + "' must be an object");
  }
  Fields(const Fields&) = delete;
  Fields& operator=(const Fields&) = delete;
  ~Fields() = default;

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    seen_.push_back(key);
    return obj_.contains(key);
  }
  const json& at(const std::string& key) {
    if (!has(key)) throw ConfigError("missing field '" + child(key) + "'");
    return obj_.at(key);
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError("field '" + child(key) + "' must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) throw ConfigError("field '" + child(key) + "' must be an integer");
    return v.get<int>();
  }

  std::string text(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError("field '" + child(key) + "' must be a string");
    return v.get<std::string>();
  }

  Vec3 vec3(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array() || v.size() != 3 ||
        !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); }))
      throw ConfigError("field '" + child(key) + "' must be an array of 3 numbers");
    return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); }))
      throw ConfigError("field '" + child(key) + "' must be an array of numbers");
    return v.get<std::vector<double>>();
  }

  /// Warns about keys that were never read.
  void finish() {
    for (const auto& item : obj_.items())
      if (std::find(seen_.begin(), seen_.end(), item.key()) == seen_.end())
        warnings_.push_back("unknown field '" + child(item.key()) + "' ignored");
  }

  std::vector<std::string>& warnings() { return warnings_; }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const json& obj_;
  std::string path_;
  std::vector<std::string>& warnings_;
  std::vector<std::string> seen_;
};

PulseSpec pulse_from_json(const json& j, const std::string& path, const std::filesystem::path& base,
                          std::vector<std::string>& warnings) {
  Fields f(j, path, warnings);
  const std::string kind = f.text("kind");
  PulseSpec p;
  if (kind == "raised_cosine") {
    p = PulseSpec::raised_cosine(f.number("amplitude"), f.number("duration"),
                                 f.number("center_frequency"));
  } else if (kind == "tabulated") {
    if (f.has("file")) {
      std::filesystem::path file = f.text("file");
      if (file.is_relative() && !base.empty()) file = base / file;
      p = load_pulse_csv(file);
    } else {
      p = PulseSpec::tabulated(f.numbers("times"), f.numbers("values"));
    }
    p.center_frequency = f.number("center_frequency", 0.0);
  } else {
    throw ConfigError("field '" + f.child("kind") + "' must be raised_cosine or tabulated");
  }
  f.finish();
  return p;
}

json pulse_to_json(const PulseSpec& p) {
  if (p.kind == PulseKind::RaisedCosineSinusoid)
    return {{"kind", "raised_cosine"},
            {"amplitude", p.amplitude},
            {"duration", p.duration},
            {"center_frequency", p.center_frequency}};
  return {{"kind", "tabulated"},
          {"times", p.table_times},
          {"values", p.table_values},
          {"center_frequency", p.center_frequency}};
}

bool same_pulse(const PulseSpec& a, const PulseSpec& b) {
  return a.kind == b.kind && a.amplitude == b.amplitude && a.duration == b.duration &&
         a.center_frequency == b.center_frequency && a.table_times == b.table_times &&
         a.table_values == b.table_values;
}

SearchConfig search_from_json(const json& j, std::vector<std::string>& warnings) {
  Fields f(j, "search", warnings);
  SearchConfig c;
  c.direct_grid_step = f.number("direct_grid_step", c.direct_grid_step);
  c.offset_min = f.number("offset_min", c.offset_min);
  c.offset_max = f.number("offset_max", c.offset_max);
  c.offset_grid_cycles = f.number("offset_grid_cycles", c.offset_grid_cycles);
  c.direct_starts = f.integer("direct_starts", c.direct_starts);
  c.lobe_hops = f.integer("lobe_hops", c.lobe_hops);
  c.position_tolerance = f.number("position_tolerance", c.position_tolerance);
  c.offset_tolerance = f.number("offset_tolerance", c.offset_tolerance);
  c.max_evaluations = f.integer("max_evaluations", c.max_evaluations);
  c.two_step_grid_step = f.number("two_step_grid_step", c.two_step_grid_step);
  c.two_step_starts = f.integer("two_step_starts", c.two_step_starts);
  const int ref = f.integer("reference_led", 0);
  if (ref < 0) throw ConfigError("field 'search.reference_led' must be >= 0");
  c.reference_led = static_cast<std::size_t>(ref);
  c.low_confidence_ratio = f.number("low_confidence_ratio", c.low_confidence_ratio);
  c.region_margin = f.number("region_margin", c.region_margin);
  c.multimodal_distance = f.number("multimodal_distance", c.multimodal_distance);
  f.finish();
  return c;
}

json search_to_json(const SearchConfig& c) {
  return {{"direct_grid_step", c.direct_grid_step},
          {"offset_min", c.offset_min},
          {"offset_max", c.offset_max},
          {"offset_grid_cycles", c.offset_grid_cycles},
          {"direct_starts", c.direct_starts},
          {"lobe_hops", c.lobe_hops},
          {"position_tolerance", c.position_tolerance},
          {"offset_tolerance", c.offset_tolerance},
          {"max_evaluations", c.max_evaluations},
          {"two_step_grid_step", c.two_step_grid_step},
          {"two_step_starts", c.two_step_starts},
          {"reference_led", c.reference_led},
          {"low_confidence_ratio", c.low_confidence_ratio},
          {"region_margin", c.region_margin},
          {"multimodal_distance", c.multimodal_distance}};
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

/// Splits "a.b.0.c" into its components.
std::vector<std::string> split_path(const std::string& key) {
  std::vector<std::string> parts;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  return parts;
}

bool is_index(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

LoadedScenario scenario_from_json(const json& doc, const std::filesystem::path& base_dir) {
  LoadedScenario out;
  auto& w = out.warnings;
  Scenario& s = out.scenario;
  Fields root(doc, "", w);

  {
    Fields room(root.at("room"), "room", w);
    s.room.min_corner = room.vec3("min");
    s.room.max_corner = room.vec3("max");
    room.finish();
  }

  const json& leds = root.at("leds");
  if (!leds.is_array()) throw ConfigError("field 'leds' must be an array");
  s.leds.clear();
  for (std::size_t i = 0; i < leds.size(); ++i) {
    Fields led(leds[i], "leds." + std::to_string(i), w);
    LedTransmitter t;
    t.position = led.vec3("position");
    t.normal = led.vec3("normal");
    t.lambertian_order = led.number("lambertian_order");
    led.finish();
    s.leds.push_back(t);
  }

  {
    Fields rx(root.at("receiver"), "receiver", w);
    s.receiver.position = rx.vec3("position");
    s.receiver.normal = rx.vec3("normal");
    s.receiver.responsivity = rx.number("responsivity");
    s.receiver.detector_area = rx.number("detector_area");
    rx.finish();
  }

  s.offset.delta = root.number("clock_offset");

  const bool shared = root.has("pulse");
  const bool per_led = root.has("pulses");
  if (shared == per_led) throw ConfigError("exactly one of 'pulse' or 'pulses' must be given");
  if (shared) {
    s.set_pulse(pulse_from_json(root.at("pulse"), "pulse", base_dir, w));
  } else {
    const json& ps = root.at("pulses");
    if (!ps.is_array()) throw ConfigError("field 'pulses' must be an array");
    s.pulses.clear();
    for (std::size_t i = 0; i < ps.size(); ++i)
      s.pulses.push_back(pulse_from_json(ps[i], "pulses." + std::to_string(i), base_dir, w));
  }

  {
    Fields noise(root.at("noise"), "noise", w);
    s.noise.psd = noise.number("psd");
    if (noise.has("seed")) {
      const json& seed = noise.at("seed");
      if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
        throw ConfigError("field 'noise.seed' must be a non-negative integer");
      s.noise.seed = seed.get<std::uint64_t>();
    }
    noise.finish();
  }

  s.sample_rate = root.number("sample_rate", 0.0);
  s.oversample_factor = root.number("oversample_factor", 16.0);
  s.mode = mode_from_string(root.text("mode"));
  if (root.has("search")) s.search = search_from_json(root.at("search"), w);
  root.finish();
  return out;
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["room"] = {{"min", vec_json(s.room.min_corner)}, {"max", vec_json(s.room.max_corner)}};
  doc["leds"] = json::array();
  for (const auto& led : s.leds)
    doc["leds"].push_back({{"position", vec_json(led.position)},
                           {"normal", vec_json(led.normal)},
                           {"lambertian_order", led.lambertian_order}});
  doc["receiver"] = {{"position", vec_json(s.receiver.position)},
                     {"normal", vec_json(s.receiver.normal)},
                     {"responsivity", s.receiver.responsivity},
                     {"detector_area", s.receiver.detector_area}};
  doc["clock_offset"] = s.offset.delta;
  const bool shared = !s.pulses.empty() && std::all_of(s.pulses.begin(), s.pulses.end(), [&](const auto& p) {
    return same_pulse(p, s.pulses.front());
  });
  if (shared) {
    doc["pulse"] = pulse_to_json(s.pulses.front());
  } else {
    doc["pulses"] = json::array();
    for (const auto& p : s.pulses) doc["pulses"].push_back(pulse_to_json(p));
  }
  doc["noise"] = {{"psd", s.noise.psd}, {"seed", s.noise.seed}};
  doc["sample_rate"] = s.sample_rate;
  doc["oversample_factor"] = s.oversample_factor;
  doc["mode"] = to_string(s.mode);
  doc["search"] = search_to_json(s.search);
  return doc;
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line and column.
    const auto offset = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t k = 0; k + 1 < offset; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": JSON parse error: " + e.what());
  }
}

void apply_override(json& doc, const std::string& key, const std::string& value) {
  const auto parts = split_path(key);
  if (parts.empty()) throw ConfigError("empty override key");
  json* node = &doc;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::string& part = parts[k];
    if (node->is_array() && is_index(part)) {
      const auto idx = std::stoul(part);
      if (idx >= node->size()) throw ConfigError("override '" + key + "': index " + part + " out of range");
      node = &(*node)[idx];
    } else if (node->is_object() && node->contains(part)) {
      node = &(*node)[part];
    } else {
      throw ConfigError("override '" + key + "' does not name a scenario field");
    }
  }
  try {
    *node = json::parse(value);
  } catch (const json::parse_error&) {
    *node = value;
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must have the form key=value");
  apply_override(doc, assignment.substr(0, eq), assignment.substr(eq + 1));
}

namespace {

LoadedScenario finish_load(const json& doc, const std::vector<std::string>& overrides,
                           const std::filesystem::path& base_dir, bool require_integer_cycles) {
  LoadedScenario out = scenario_from_json(doc, base_dir);
  if (!overrides.empty()) {
    // Overrides address the complete document, so defaulted fields can be set too.
    json full = scenario_to_json(out.scenario);
    for (const auto& o : overrides) apply_override(full, o);
    out.scenario = scenario_from_json(full, base_dir).scenario;
  }
  out.scenario.validate(require_integer_cycles);
  return out;
}

}  // namespace

LoadedScenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                             bool require_integer_cycles) {
  const json doc = parse_json_text(read_file(path), path.string());
  return finish_load(doc, overrides, path.parent_path(), require_integer_cycles);
}

LoadedScenario override_scenario(const Scenario& base, const std::vector<std::string>& overrides,
                                 bool require_integer_cycles) {
  return finish_load(scenario_to_json(base), overrides, {}, require_integer_cycles);
}

}  // namespace qsvlp
