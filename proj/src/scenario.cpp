#include "qsvlp/scenario.hpp"

#include <algorithm>

namespace qsvlp {

bool Room::contains(const Vec3& p, double tol) const {
  return (p.array() >= min_corner.array() - tol).all() &&
         (p.array() <= max_corner.array() + tol).all();
}

const char* to_string(Mode m) { return m == Mode::TwoD ? "two_d" : "three_d"; }

Mode mode_from_string(const std::string& s) {
  if (s == "two_d" || s == "2d") return Mode::TwoD;
  if (s == "three_d" || s == "3d") return Mode::ThreeD;
  throw ConfigError("unknown mode '" + s + "' (expected two_d or three_d)");
}

std::vector<std::string> SearchConfig::violations() const {
  std::vector<std::string> out;
  if (!(direct_grid_step > 0.0)) out.push_back("search.direct_grid_step must be > 0");
  if (!(two_step_grid_step > 0.0)) out.push_back("search.two_step_grid_step must be > 0");
  if (!(offset_max > offset_min)) out.push_back("search.offset_max must exceed search.offset_min");
  if (!(offset_grid_cycles > 0.0)) out.push_back("search.offset_grid_cycles must be > 0");
  if (direct_starts < 1) out.push_back("search.direct_starts must be >= 1");
  if (two_step_starts < 1) out.push_back("search.two_step_starts must be >= 1");
  if (lobe_hops < 0) out.push_back("search.lobe_hops must be >= 0");
  if (!(position_tolerance > 0.0)) out.push_back("search.position_tolerance must be > 0");
  if (!(offset_tolerance > 0.0)) out.push_back("search.offset_tolerance must be > 0");
  if (max_evaluations < 10) out.push_back("search.max_evaluations must be >= 10");
  if (!(region_margin >= 0.0)) out.push_back("search.region_margin must be >= 0");
  if (!(low_confidence_ratio >= 0.0)) out.push_back("search.low_confidence_ratio must be >= 0");
  return out;
}

double Scenario::sampling_rate() const {
  if (sample_rate > 0.0) return sample_rate;
  double fc = 0.0;
  for (const auto& p : pulses) fc = std::max(fc, p.center_frequency);
  if (fc > 0.0) return oversample_factor * fc;
  // Tabulated pulses without a carrier: 16 samples per table step.
  double dt = 0.0;
  for (const auto& p : pulses)
    for (std::size_t j = 1; j < p.table_times.size(); ++j) {
      const double h = p.table_times[j] - p.table_times[j - 1];
      dt = dt == 0.0 ? h : std::min(dt, h);
    }
  return dt > 0.0 ? oversample_factor / dt : 0.0;
}

ObservationWindow Scenario::window() const {
  double duration = 0.0;
  for (const auto& p : pulses) duration = std::max(duration, p.duration);
  return observation_window(duration, room.diagonal() / kSpeedOfLight, search.offset_min,
                            search.offset_max);
}

std::vector<std::string> Scenario::violations(bool require_integer_cycles) const {
  std::vector<std::string> out;
  if (!((room.max_corner.array() > room.min_corner.array()).all()))
    out.push_back("room: max corner must exceed min corner on every axis");
  if (leds.empty()) out.push_back("leds: at least one LED required");
  for (std::size_t i = 0; i < leds.size(); ++i) {
    for (const auto& v : leds[i].violations())
      out.push_back("leds[" + std::to_string(i) + "]: " + v);
    if (!room.contains(leds[i].position))
      out.push_back("leds[" + std::to_string(i) + "]: position outside room");
  }
  for (const auto& v : receiver.violations()) out.push_back("receiver: " + v);
  if (!room.contains(receiver.position)) out.push_back("receiver: position outside room");
  if (pulses.size() != leds.size())
    out.push_back("pulses: expected one pulse per LED (" + std::to_string(leds.size()) + "), got " +
                  std::to_string(pulses.size()));
  for (std::size_t i = 0; i < pulses.size(); ++i)
    for (const auto& v : pulses[i].violations(require_integer_cycles))
      out.push_back("pulse[" + std::to_string(i) + "]: " + v);
  if (!(noise.psd >= 0.0)) out.push_back("noise.psd must be >= 0");
  if (!(oversample_factor > 0.0)) out.push_back("oversample_factor must be > 0");
  if (sample_rate < 0.0) out.push_back("sample_rate must be >= 0");
  for (const auto& v : search.violations()) out.push_back(v);
  if (search.reference_led >= leds.size() && !leds.empty())
    out.push_back("search.reference_led out of range");
  if (offset.delta < search.offset_min || offset.delta > search.offset_max)
    out.push_back("clock_offset outside [search.offset_min, search.offset_max]");
  bool any_valid = false;
  for (const auto& led : leds) {
    if ((led.position - receiver.position).norm() > 0.0 && link_valid(receiver, led)) {
      any_valid = true;
      break;
    }
  }
  if (!leds.empty() && !any_valid) out.push_back("no LED has a line-of-sight link to the receiver");
  return out;
}

void Scenario::validate(bool require_integer_cycles) const {
  const auto v = violations(require_integer_cycles);
  if (v.empty()) return;
  std::string msg = "invalid scenario:";
  for (const auto& s : v) msg += "\n  - " + s;
  throw ConfigError(msg);
}

void Scenario::set_pulse(const PulseSpec& p) { pulses.assign(leds.size(), p); }

}  // namespace qsvlp
