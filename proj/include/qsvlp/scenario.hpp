#pragma once

#include "qsvlp/common.hpp"
#include "qsvlp/geometry.hpp"
#include "qsvlp/signal.hpp"

#include <string>
#include <vector>

namespace qsvlp {

/// Axis-aligned box, meters.
struct Room {
  Vec3 min_corner = Vec3::Zero();
  Vec3 max_corner = Vec3(15.0, 15.0, 4.0);

  bool contains(const Vec3& p, double tol = 1e-9) const;
  Vec3 center() const { return 0.5 * (min_corner + max_corner); }
  double diagonal() const { return (max_corner - min_corner).norm(); }
};

/// two_d: receiver height known and frozen; three_d: all coordinates unknown.
enum class Mode { TwoD, ThreeD };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

/// Estimator search parameters.
struct SearchConfig {
  // Direct estimator.
  double direct_grid_step = 0.25;          // m
  double offset_min = -2e-7;               // s
  double offset_max = 2e-7;                // s
  double offset_grid_cycles = 0.5;         // offset grid step in carrier periods
  int direct_starts = 5;
  int lobe_hops = 2;                       // +- carrier periods tried around the best optimum
  double position_tolerance = 1e-6;        // m
  double offset_tolerance = 1e-14;         // s
  int max_evaluations = 4000;              // per local refinement
  // Two-step estimator.
  double two_step_grid_step = 0.5;         // m
  int two_step_starts = 8;
  std::size_t reference_led = 0;
  double low_confidence_ratio = 0.2;
  // Local refinements may leave the room by this much; the coarse grids stay inside.
  double region_margin = 0.5;              // m
  double multimodal_distance = 0.1;        // m

  std::vector<std::string> violations() const;
};

/// Complete experiment: room, transmitters, receiver truth, waveform and
/// noise, sampling, and estimator configuration.
struct Scenario {
  Room room;
  std::vector<LedTransmitter> leds;
  VlcReceiver receiver;          // truth
  ClockOffset offset;            // truth
  std::vector<PulseSpec> pulses; // one per LED
  NoiseSpec noise;
  double oversample_factor = 16.0;
  double sample_rate = 0.0;      // Hz; 0 derives oversample_factor * max f_c
  Mode mode = Mode::TwoD;
  SearchConfig search;

  std::size_t led_count() const { return leds.size(); }

  /// Effective sample rate.
  double sampling_rate() const;

  /// Window shared by all links, covering every admissible hypothesis.
  ObservationWindow window() const;

  /// All invariant violations; `require_integer_cycles` as in PulseSpec.
  std::vector<std::string> violations(bool require_integer_cycles = true) const;

  /// Throws ConfigError listing every violation.
  void validate(bool require_integer_cycles = true) const;

  /// Sets one pulse for every LED.
  void set_pulse(const PulseSpec& p);
};

}  // namespace qsvlp
