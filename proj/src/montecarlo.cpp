#include "qsvlp/montecarlo.hpp"

#include "qsvlp/crlb.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace qsvlp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Runs job(i) for i in [0, n) on a small pool; each job writes its own slot.
template <class Job>
void parallel_for(int n, unsigned threads, Job job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(n, 1)));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) job(i);
    });
  for (auto& th : pool) th.join();
}

std::optional<double> try_sqrt_crlb(const Scenario& s) {
  try {
    return sqrt_crlb(s);
  } catch (const RankDeficientError&) {
    return std::nullopt;
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

}  // namespace

Scenario reference_scenario() {
  Scenario s;
  s.room = Room{Vec3::Zero(), Vec3(15.0, 15.0, 4.0)};
  for (const Vec3& p : {Vec3(10, 10, 4), Vec3(5, 10, 4), Vec3(10, 5, 4), Vec3(5, 5, 4)}) {
    LedTransmitter led;
    led.position = p;
    led.normal = Vec3(0, 0, -1);
    led.lambertian_order = 1.0;
    s.leds.push_back(led);
  }
  s.receiver.position = Vec3(6.0, 5.75, 0.0);
  s.receiver.normal = Vec3(0, 0, 1);
  s.receiver.responsivity = 0.4;
  s.receiver.detector_area = 1e-4;
  s.offset.delta = 3e-8;
  s.set_pulse(PulseSpec::raised_cosine(1.0, 1e-6, 1e8));
  s.noise.psd = 1.336e-22;
  s.noise.seed = 0;
  s.mode = Mode::TwoD;
  return s;
}

Scenario tilted_scenario(double theta) {
  if (!(theta >= 0.0 && theta < std::numbers::pi / 2))
    throw ConfigError("tilt angle must lie in [0, pi/2)");
  Scenario s = reference_scenario();
  const double nx = std::sin(theta) / std::numbers::sqrt2;
  const double ny = nx;
  const double nz = std::cos(theta);
  s.leds[0].normal = Vec3(-nx, -ny, -nz);
  s.leds[1].normal = Vec3(nx, -ny, -nz);
  s.leds[2].normal = Vec3(-nx, ny, -nz);
  s.leds[3].normal = Vec3(nx, ny, -nz);
  return s;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial, std::uint64_t led) {
  return splitmix64(splitmix64(splitmix64(base_seed) ^ trial) ^ (led * 0x632be59bd9b4e019ULL));
}

ReceivedSignalSet synthesize_signals(const Scenario& s, std::uint64_t base_seed, std::uint64_t trial) {
  return synthesize_signals(s, base_seed, trial, s.window());
}

ReceivedSignalSet synthesize_signals(const Scenario& s, std::uint64_t base_seed, std::uint64_t trial,
                                     const ObservationWindow& w) {
  ReceivedSignalSet rs;
  rs.meta = receiver_knowledge(s);
  const double fs = s.sampling_rate();
  for (std::size_t i = 0; i < s.leds.size(); ++i) {
    NoiseSpec noise = s.noise;
    noise.seed = trial_seed(base_seed, trial, i);
    if (link_valid(s.receiver, s.leds[i])) {
      const LinkModel link{s.receiver, s.leds[i], s.offset, s.pulses[i]};
      rs.signals.push_back(synthesize_received(link, noise, fs, w, s.oversample_factor));
    } else {
      rs.signals.push_back(synthesize_waveform(0.0, 0.0, s.pulses[i], noise, fs, w));
    }
  }
  return rs;
}

const char* to_string(EstimatorKind e) { return e == EstimatorKind::Direct ? "direct" : "two_step"; }

EstimatorKind estimator_from_string(const std::string& s) {
  if (s == "direct") return EstimatorKind::Direct;
  if (s == "two_step" || s == "two-step") return EstimatorKind::TwoStep;
  throw ConfigError("unknown estimator '" + s + "' (expected direct or two_step)");
}

PositionEstimate run_estimator(EstimatorKind kind, const ReceivedSignalSet& rs,
                               const SearchConfig& search) {
  if (kind == EstimatorKind::Direct) return direct_ml(rs, search);
  return two_step_ml(first_step(rs, search), rs.meta, search);
}

TrialSummary run_trials(const Scenario& s, EstimatorKind estimator, int n, std::uint64_t base_seed,
                        unsigned threads) {
  if (n < 1) throw ConfigError("trial count must be >= 1");
  s.validate();
  TrialSummary out;
  out.trials.resize(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](int t) {
    TrialOutcome& o = out.trials[static_cast<std::size_t>(t)];
    try {
      const ReceivedSignalSet rs = synthesize_signals(s, base_seed, static_cast<std::uint64_t>(t));
      const PositionEstimate est = run_estimator(estimator, rs, s.search);
      o.error = est.position - s.receiver.position;
      o.multimodal = est.diagnostics.multimodal;
    } catch (const std::exception& e) {
      o.failure = e.what();
    }
  });
  double sum = 0.0;
  for (const auto& o : out.trials) {
    if (o.error)
      sum += o.error->squaredNorm();
    else
      ++out.failures;
  }
  out.rmse = out.successes() > 0 ? std::sqrt(sum / out.successes())
                                 : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::vector<SurfacePoint> crlb_surface(const Scenario& s, double spacing) {
  if (!(spacing > 0.0)) throw ConfigError("grid spacing must be > 0");
  std::vector<SurfacePoint> out;
  const Vec3 lo = s.room.min_corner;
  const Vec3 hi = s.room.max_corner;
  const auto nx = static_cast<int>(std::floor((hi.x() - lo.x()) / spacing + 1e-9));
  const auto ny = static_cast<int>(std::floor((hi.y() - lo.y()) / spacing + 1e-9));
  // Centre the grid in the room so mirror-symmetric constellations give
  // mirror-symmetric surfaces.
  const double ox = lo.x() + 0.5 * ((hi.x() - lo.x()) - (nx - 1) * spacing);
  const double oy = lo.y() + 0.5 * ((hi.y() - lo.y()) - (ny - 1) * spacing);
  Scenario moved_s = s;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      SurfacePoint p;
      p.x = ox + i * spacing;
      p.y = oy + j * spacing;
      moved_s.receiver.position = Vec3(p.x, p.y, s.receiver.position.z());
      p.sqrt_crlb = try_sqrt_crlb(moved_s);
      out.push_back(p);
    }
  return out;
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Power: return "power";
    case SweepAxis::CenterFrequency: return "center_frequency";
    case SweepAxis::PulseDuration: return "pulse_duration";
    case SweepAxis::TiltAngle: return "tilt_angle";
  }
  return "power";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "power") return SweepAxis::Power;
  if (s == "center_frequency") return SweepAxis::CenterFrequency;
  if (s == "pulse_duration") return SweepAxis::PulseDuration;
  if (s == "tilt_angle") return SweepAxis::TiltAngle;
  throw ConfigError("unknown sweep axis '" + s +
                    "' (expected power, center_frequency, pulse_duration or tilt_angle)");
}

std::string axis_column(SweepAxis a) {
  switch (a) {
    case SweepAxis::Power: return "power_W";
    case SweepAxis::CenterFrequency: return "center_frequency_Hz";
    case SweepAxis::PulseDuration: return "pulse_duration_s";
    case SweepAxis::TiltAngle: return "tilt_angle_rad";
  }
  return "power_W";
}

Scenario apply_axis(const Scenario& s, SweepAxis axis, double value) {
  Scenario out = s;
  if (axis == SweepAxis::TiltAngle) {
    const Scenario tilted = tilted_scenario(value);
    for (std::size_t i = 0; i < out.leds.size() && i < tilted.leds.size(); ++i)
      out.leds[i].normal = tilted.leds[i].normal;
    return out;
  }
  for (auto& p : out.pulses) {
    switch (axis) {
      case SweepAxis::Power: p.amplitude = value; break;
      case SweepAxis::CenterFrequency: p.center_frequency = value; break;
      case SweepAxis::PulseDuration: p.duration = value; break;
      case SweepAxis::TiltAngle: break;
    }
  }
  return out;
}

SweepResult sweep(const Scenario& s, SweepAxis axis, const std::vector<double>& values,
                  const std::vector<EstimatorKind>& estimators, int n, std::uint64_t base_seed,
                  unsigned threads) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (!std::is_sorted(values.begin(), values.end())) throw ConfigError("sweep values must be sorted");
  SweepResult out;
  out.axis = axis;
  out.trial_count = estimators.empty() ? 0 : n;
  out.base_seed = base_seed;
  for (double v : values) {
    const Scenario sv = apply_axis(s, axis, v);
    SweepPoint pt;
    pt.value = v;
    pt.sqrt_crlb = try_sqrt_crlb(sv);
    for (EstimatorKind e : estimators) {
      TrialSummary r;
      try {
        r = run_trials(sv, e, n, base_seed, threads);
      } catch (const std::exception&) {
        r.failures = n;
        r.rmse = std::numeric_limits<double>::quiet_NaN();
      }
      const std::optional<double> rmse =
          std::isfinite(r.rmse) ? std::optional<double>(r.rmse) : std::nullopt;
      if (e == EstimatorKind::Direct) {
        pt.rmse_direct = rmse;
        pt.failures_direct = r.failures;
      } else {
        pt.rmse_two_step = rmse;
        pt.failures_two_step = r.failures;
      }
      if (10 * r.failures > n) pt.unreliable = true;
    }
    out.points.push_back(pt);
  }
  return out;
}

}  // namespace qsvlp
