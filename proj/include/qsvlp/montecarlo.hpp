#pragma once

#include "qsvlp/estimators.hpp"
#include "qsvlp/scenario.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qsvlp {

/// 15 x 15 x 4 m room, four downward LEDs at the ceiling, receiver at
/// [6, 5.75, 0] facing up, raised-cosine pulse with f_c = 100 MHz,
/// T_s = 1 us, A = 1 W, offset 30 ns, height-known mode.
Scenario reference_scenario();

/// Default scenario with every LED tilted by `theta` towards the room centre.
/// Throws ConfigError unless 0 <= theta < pi/2.
Scenario tilted_scenario(double theta);

/// Counter-based seed for one noise realization.
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial, std::uint64_t led);

/// Received signals of every LED for one trial, plus what the receiver knows.
/// Links without line of sight carry noise only.
ReceivedSignalSet synthesize_signals(const Scenario& s, std::uint64_t base_seed, std::uint64_t trial);

/// Same, observed on an explicit window instead of s.window(). Moving the
/// window together with the clock offset keeps every sample (signal and
/// noise) unchanged.
ReceivedSignalSet synthesize_signals(const Scenario& s, std::uint64_t base_seed, std::uint64_t trial,
                                     const ObservationWindow& window);

enum class EstimatorKind { Direct, TwoStep };

const char* to_string(EstimatorKind e);
EstimatorKind estimator_from_string(const std::string& s);

/// One estimate from one set of signals.
PositionEstimate run_estimator(EstimatorKind kind, const ReceivedSignalSet& rs,
                               const SearchConfig& search);

struct TrialOutcome {
  std::optional<Vec3> error;  // estimate - truth; empty when the estimator failed
  std::string failure;
  bool multimodal = false;
};

struct TrialSummary {
  double rmse = 0.0;  // NaN when every trial failed
  std::vector<TrialOutcome> trials;
  int failures = 0;
  int successes() const { return static_cast<int>(trials.size()) - failures; }
};

/// Runs `n` independent trials (in parallel, reduced in trial order). The
/// free coordinates of the scenario mode enter the error; frozen ones are
/// exact by construction.
TrialSummary run_trials(const Scenario& s, EstimatorKind estimator, int n, std::uint64_t base_seed,
                        unsigned threads = 0);

struct SurfacePoint {
  double x = 0.0;
  double y = 0.0;
  std::optional<double> sqrt_crlb;  // empty where the FIM is singular
};

/// sqrt-CRLB with the receiver moved over a floor grid (receiver height kept).
/// Grid points run from spacing/2 inside each wall, so the grid is symmetric.
std::vector<SurfacePoint> crlb_surface(const Scenario& s, double spacing);

enum class SweepAxis { Power, CenterFrequency, PulseDuration, TiltAngle };

const char* to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

/// CSV column name of an axis, with its unit (power_W, center_frequency_Hz,
/// pulse_duration_s, tilt_angle_rad).
std::string axis_column(SweepAxis a);

/// Scenario with one parameter replaced (pulse of every LED, or the tilt).
/// Tilt keeps the scenario's LED positions.
Scenario apply_axis(const Scenario& s, SweepAxis axis, double value);

struct SweepPoint {
  double value = 0.0;
  std::optional<double> sqrt_crlb;
  std::optional<double> rmse_direct;
  std::optional<double> rmse_two_step;
  int failures_direct = 0;
  int failures_two_step = 0;
  bool unreliable = false;  // more than 10% failed trials for some estimator
};

struct SweepResult {
  SweepAxis axis = SweepAxis::Power;
  std::vector<SweepPoint> points;
  int trial_count = 0;
  std::uint64_t base_seed = 0;
};

/// CRLB at every value, plus Monte Carlo RMSE for the requested estimators.
/// Trial seeds depend only on (base_seed, trial, led), so every point sees the
/// same noise shapes. Throws ConfigError when values are empty or unsorted.
SweepResult sweep(const Scenario& s, SweepAxis axis, const std::vector<double>& values,
                  const std::vector<EstimatorKind>& estimators, int n, std::uint64_t base_seed,
                  unsigned threads = 0);

}  // namespace qsvlp
