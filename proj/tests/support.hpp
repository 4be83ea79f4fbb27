#pragma once

#include "qsvlp/montecarlo.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace qsvlp::testing {

/// Unit vector within `max_tilt` of `axis` (axis must be +-z).
inline Vec3 tilted_normal(std::mt19937_64& rng, double axis_z, double max_tilt) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double th = max_tilt * u(rng);
  const double ph = 2.0 * std::numbers::pi * u(rng);
  return Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), axis_z * std::cos(th));
}

/// Random constellation of `leds` ceiling LEDs and a floor-level receiver,
/// every link with line of sight.
inline Scenario random_scenario(std::mt19937_64& rng, int leds) {
  std::uniform_real_distribution<double> xy(1.0, 14.0);
  std::uniform_real_distribution<double> z(0.0, 2.0);
  std::uniform_real_distribution<double> order(1.0, 3.0);
  std::uniform_real_distribution<double> fc_exp(6.0, 8.5);
  for (;;) {
    Scenario s = reference_scenario();
    s.leds.clear();
    for (int i = 0; i < leds; ++i) {
      LedTransmitter t;
      t.position = Vec3(xy(rng), xy(rng), 4.0);
      t.normal = tilted_normal(rng, -1.0, 0.5);
      t.lambertian_order = order(rng);
      s.leds.push_back(t);
    }
    s.receiver.position = Vec3(xy(rng), xy(rng), z(rng));
    s.receiver.normal = tilted_normal(rng, 1.0, 0.4);
    s.set_pulse(PulseSpec::raised_cosine(1.0, 1e-6, std::round(std::pow(10.0, fc_exp(rng)) * 1e-6) * 1e6));
    bool ok = true;
    for (const auto& l : s.leds) ok = ok && link_valid(s.receiver, l);
    if (ok) return s;
  }
}

}  // namespace qsvlp::testing
