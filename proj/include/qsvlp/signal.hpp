#pragma once

#include "qsvlp/common.hpp"
#include "qsvlp/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace qsvlp {

enum class PulseKind { RaisedCosineSinusoid, Tabulated };

/// Transmitted optical power waveform, nonzero only on [0, duration].
///
/// The raised-cosine kind is A (1 + cos(2 pi f_c t - pi)). The tabulated
/// kind linearly interpolates (time, value) samples that start at t = 0;
/// the last sample time is the duration.
struct PulseSpec {
  PulseKind kind = PulseKind::RaisedCosineSinusoid;
  double amplitude = 1.0;          // W
  double duration = 1e-6;          // s
  double center_frequency = 1e8;   // Hz; optional for tabulated pulses (0 = unset)
  std::vector<double> table_times;
  std::vector<double> table_values;

  static PulseSpec raised_cosine(double amplitude, double duration, double center_frequency);
  static PulseSpec tabulated(std::vector<double> times, std::vector<double> values);

  /// Number of carrier cycles f_c * T_s (raised-cosine kind).
  double cycles() const { return center_frequency * duration; }

  /// Invariant violations. `require_integer_cycles` enforces f_c T_s in Z,
  /// which waveform synthesis needs; bound computations may relax it.
  std::vector<std::string> violations(bool require_integer_cycles = true) const;
};

/// Loads a tabulated pulse from a two-column CSV (time_s, value_W) with a
/// header row.
PulseSpec load_pulse_csv(const std::filesystem::path& path);

double pulse_value(const PulseSpec& p, double t);
double pulse_derivative(const PulseSpec& p, double t);

/// E1 = int s'^2, E2 = int s^2, E3 = int s s'.
struct EnergyIntegrals {
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
};

EnergyIntegrals energy_integrals(const PulseSpec& p);

struct SampledSignal {
  double sample_rate = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<double> values;  // photocurrent, A

  double time(std::size_t k) const { return t_start + static_cast<double>(k) / sample_rate; }
  std::size_t size() const { return values.size(); }
};

/// Sample count for a window, round((t_end - t_start) f_s) + 1.
std::size_t window_sample_count(double t_start, double t_end, double sample_rate);

struct NoiseSpec {
  double psd = 1.336e-22;  // two-sided level of the continuous AWGN
  std::uint64_t seed = 0;
};

/// Receiver observation interval shared by all links.
struct ObservationWindow {
  double t_start = 0.0;
  double t_end = 0.0;
};

/// Window long enough to hold the pulse for every admissible hypothesis:
/// delays up to `max_geometric_delay` and offsets in [offset_min, offset_max].
ObservationWindow observation_window(double pulse_duration, double max_geometric_delay,
                                     double offset_min, double offset_max);

struct LinkModel {
  VlcReceiver rx;
  LedTransmitter tx;
  ClockOffset offset;
  PulseSpec pulse;
};

/// gain * s(t - delay) + white noise of variance psd * f_s per sample,
/// sampled on `window`. Noise is omitted when psd == 0.
SampledSignal synthesize_waveform(double gain, double delay, const PulseSpec& pulse,
                                  const NoiseSpec& noise, double sample_rate,
                                  const ObservationWindow& window);

/// Received photocurrent r(t) = alpha R_p s(t - tau) + n(t) for one link.
/// Throws DomainError for an invalid link, ConfigError if the window cannot
/// hold the delayed pulse or the sample rate is below
/// `min_oversample` * f_c.
SampledSignal synthesize_received(const LinkModel& link, const NoiseSpec& noise,
                                  double sample_rate, const ObservationWindow& window,
                                  double min_oversample = 16.0);

/// Riemann sum  sum_k x[k] s(t_k - shift) / f_s.
/// Throws DomainError when [shift, shift + T_s] leaves the signal window.
double integrate_product(const SampledSignal& x, const PulseSpec& p, double shift);

/// True when [shift, shift + T_s] fits in the window of `x`.
bool shift_admissible(const SampledSignal& x, const PulseSpec& p, double shift);

/// Repeated evaluation of integrate_product for one (signal, pulse) pair.
///
/// For the raised-cosine kind the sum factors into prefix sums of x,
/// x cos(w t) and x sin(w t), so each shift costs O(1). Tabulated pulses fall
/// back to the direct sum.
class Correlator {
 public:
  Correlator(const SampledSignal& x, const PulseSpec& p);

  /// Same value as integrate_product(x, p, shift) up to rounding.
  double operator()(double shift) const;

  bool admissible(double shift) const;
  double min_shift() const { return min_shift_; }
  double max_shift() const { return max_shift_; }
  const SampledSignal& signal() const { return *signal_; }
  const PulseSpec& pulse() const { return *pulse_; }

 private:
  const SampledSignal* signal_;
  const PulseSpec* pulse_;
  double min_shift_;
  double max_shift_;
  bool fast_;
  std::vector<double> sum0_;  // prefix sums, size N + 1
  std::vector<double> sumc_;
  std::vector<double> sums_;
};

}  // namespace qsvlp
