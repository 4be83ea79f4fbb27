#include "qsvlp/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace qsvlp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Relative slack when deciding whether a shifted pulse fits in a window.
constexpr double kWindowSlack = 1e-9;

}  // namespace

PulseSpec PulseSpec::raised_cosine(double amplitude, double duration, double center_frequency) {
  PulseSpec p;
  p.kind = PulseKind::RaisedCosineSinusoid;
  p.amplitude = amplitude;
  p.duration = duration;
  p.center_frequency = center_frequency;
  return p;
}

PulseSpec PulseSpec::tabulated(std::vector<double> times, std::vector<double> values) {
  PulseSpec p;
  p.kind = PulseKind::Tabulated;
  p.center_frequency = 0.0;
  p.duration = times.empty() ? 0.0 : times.back();
  p.amplitude = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  p.table_times = std::move(times);
  p.table_values = std::move(values);
  return p;
}

std::vector<std::string> PulseSpec::violations(bool require_integer_cycles) const {
  std::vector<std::string> out;
  if (kind == PulseKind::RaisedCosineSinusoid) {
    if (!(amplitude > 0.0)) out.push_back("amplitude must be > 0");
    if (!(duration > 0.0)) out.push_back("duration must be > 0");
    if (!(center_frequency > 0.0)) out.push_back("center_frequency must be > 0");
    if (require_integer_cycles && center_frequency > 0.0 && duration > 0.0) {
      const double n = cycles();
      if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
        out.push_back("center_frequency * duration must be an integer");
    }
    return out;
  }
  if (table_times.size() != table_values.size())
    out.push_back("tabulated pulse: times and values differ in length");
  if (table_times.size() < 3) out.push_back("tabulated pulse needs at least 3 samples");
  if (!table_times.empty() && table_times.front() != 0.0)
    out.push_back("tabulated pulse must start at t = 0");
  for (std::size_t i = 1; i < table_times.size(); ++i) {
    if (!(table_times[i] > table_times[i - 1])) {
      out.push_back("tabulated pulse times must be strictly increasing");
      break;
    }
  }
  if (std::any_of(table_values.begin(), table_values.end(),
                  [](double v) { return !(v >= 0.0) || !std::isfinite(v); }))
    out.push_back("tabulated pulse values must be finite and nonnegative");
  return out;
}

PulseSpec load_pulse_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pulse table: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("pulse table is empty: " + path.string());
  std::vector<double> times;
  std::vector<double> values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double t = 0.0;
    double v = 0.0;
    if (!(row >> t >> v))
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
    times.push_back(t);
    values.push_back(v);
  }
  PulseSpec p = PulseSpec::tabulated(std::move(times), std::move(values));
  if (auto v = p.violations(); !v.empty()) throw ConfigError(path.string() + ": " + v.front());
  return p;
}

double pulse_value(const PulseSpec& p, double t) {
  if (t < 0.0 || t > p.duration) return 0.0;
  if (p.kind == PulseKind::RaisedCosineSinusoid)
    return p.amplitude * (1.0 - std::cos(kTwoPi * p.center_frequency * t));
  const auto& ts = p.table_times;
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  if (it == ts.end()) return p.table_values.back();
  const std::size_t j = static_cast<std::size_t>(it - ts.begin());
  const double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
  return (1.0 - w) * p.table_values[j - 1] + w * p.table_values[j];
}

double pulse_derivative(const PulseSpec& p, double t) {
  if (t < 0.0 || t > p.duration) return 0.0;
  if (p.kind == PulseKind::RaisedCosineSinusoid) {
    const double w = kTwoPi * p.center_frequency;
    return p.amplitude * w * std::sin(w * t);
  }
  const auto& ts = p.table_times;
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  if (it == ts.end()) --it;
  const std::size_t j = static_cast<std::size_t>(it - ts.begin());
  return (p.table_values[j] - p.table_values[j - 1]) / (ts[j] - ts[j - 1]);
}

EnergyIntegrals energy_integrals(const PulseSpec& p) {
  if (p.kind == PulseKind::RaisedCosineSinusoid) {
    EnergyIntegrals e;
    e.e2 = 1.5 * p.amplitude * p.amplitude * p.duration;
    e.e1 = (4.0 / 3.0) * std::numbers::pi * std::numbers::pi * p.center_frequency *
           p.center_frequency * e.e2;
    e.e3 = 0.0;
    return e;
  }
  if (p.table_times.size() < 3 || p.table_times.size() != p.table_values.size())
    throw ConfigError("tabulated pulse needs at least 3 samples");
  // Exact integrals of the piecewise-linear interpolant.
  EnergyIntegrals e;
  for (std::size_t j = 1; j < p.table_times.size(); ++j) {
    const double h = p.table_times[j] - p.table_times[j - 1];
    const double a = p.table_values[j - 1];
    const double b = p.table_values[j];
    e.e2 += h * (a * a + a * b + b * b) / 3.0;
    e.e1 += (b - a) * (b - a) / h;
    e.e3 += 0.5 * (b * b - a * a);
  }
  return e;
}

std::size_t window_sample_count(double t_start, double t_end, double sample_rate) {
  return static_cast<std::size_t>(std::llround((t_end - t_start) * sample_rate)) + 1;
}

ObservationWindow observation_window(double pulse_duration, double max_geometric_delay,
                                     double offset_min, double offset_max) {
  ObservationWindow w;
  w.t_start = std::min(0.0, offset_min);
  w.t_end = pulse_duration + max_geometric_delay + std::max(0.0, offset_max);
  return w;
}

SampledSignal synthesize_waveform(double gain, double delay, const PulseSpec& pulse,
                                  const NoiseSpec& noise, double sample_rate,
                                  const ObservationWindow& window) {
  if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be > 0");
  if (!(window.t_end > window.t_start)) throw ConfigError("empty observation window");
  if (!(noise.psd >= 0.0)) throw ConfigError("noise psd must be >= 0");
  SampledSignal x;
  x.sample_rate = sample_rate;
  x.t_start = window.t_start;
  x.t_end = window.t_end;
  x.values.resize(window_sample_count(window.t_start, window.t_end, sample_rate));
  for (std::size_t k = 0; k < x.values.size(); ++k)
    x.values[k] = gain * pulse_value(pulse, x.time(k) - delay);
  if (noise.psd > 0.0) {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise.psd * sample_rate));
    for (double& v : x.values) v += gauss(rng);
  }
  return x;
}

SampledSignal synthesize_received(const LinkModel& link, const NoiseSpec& noise,
                                  double sample_rate, const ObservationWindow& window,
                                  double min_oversample) {
  const double alpha = attenuation(link.rx, link.tx);
  if (!(alpha > 0.0)) throw DomainError("cannot synthesize a link without line of sight");
  if (link.pulse.kind == PulseKind::RaisedCosineSinusoid &&
      sample_rate < min_oversample * link.pulse.center_frequency * (1.0 - 1e-12))
    throw ConfigError("sample rate below the oversampling requirement");
  const double tau = toa(link.rx, link.tx, link.offset);
  const double slack = kWindowSlack * link.pulse.duration;
  if (tau < window.t_start - slack || tau + link.pulse.duration > window.t_end + slack)
    throw ConfigError("observation window does not contain the delayed pulse");
  return synthesize_waveform(alpha * link.rx.responsivity, tau, link.pulse, noise, sample_rate,
                             window);
}

bool shift_admissible(const SampledSignal& x, const PulseSpec& p, double shift) {
  const double slack = kWindowSlack * p.duration;
  return shift >= x.t_start - slack && shift + p.duration <= x.t_end + slack;
}

double integrate_product(const SampledSignal& x, const PulseSpec& p, double shift) {
  if (!shift_admissible(x, p, shift))
    throw DomainError("pulse support leaves the observation window");
  const double fs = x.sample_rate;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto lo = std::max<std::ptrdiff_t>(
      0, static_cast<std::ptrdiff_t>(std::floor((shift - x.t_start) * fs)));
  const auto hi = std::min<std::ptrdiff_t>(
      n - 1, static_cast<std::ptrdiff_t>(std::ceil((shift + p.duration - x.t_start) * fs)));
  double acc = 0.0;
  for (std::ptrdiff_t k = lo; k <= hi; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    acc += x.values[ku] * pulse_value(p, x.time(ku) - shift);
  }
  return acc / fs;
}

Correlator::Correlator(const SampledSignal& x, const PulseSpec& p)
    : signal_(&x),
      pulse_(&p),
      min_shift_(x.t_start),
      max_shift_(x.t_end - p.duration),
      fast_(p.kind == PulseKind::RaisedCosineSinusoid) {
  if (!fast_) return;
  const double w = kTwoPi * p.center_frequency;
  const std::size_t n = x.size();
  sum0_.assign(n + 1, 0.0);
  sumc_.assign(n + 1, 0.0);
  sums_.assign(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = x.time(k);
    sum0_[k + 1] = sum0_[k] + x.values[k];
    sumc_[k + 1] = sumc_[k] + x.values[k] * std::cos(w * t);
    sums_[k + 1] = sums_[k] + x.values[k] * std::sin(w * t);
  }
}

bool Correlator::admissible(double shift) const {
  return shift_admissible(*signal_, *pulse_, shift);
}

double Correlator::operator()(double shift) const {
  if (!fast_) return integrate_product(*signal_, *pulse_, shift);
  if (!admissible(shift)) throw DomainError("pulse support leaves the observation window");
  const SampledSignal& x = *signal_;
  const double fs = x.sample_rate;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  // Samples with t_k - shift in [0, T_s]; the pulse vanishes at both ends.
  const auto lo = std::clamp<std::ptrdiff_t>(
      static_cast<std::ptrdiff_t>(std::ceil((shift - x.t_start) * fs)), 0, n);
  const auto hi = std::clamp<std::ptrdiff_t>(
      static_cast<std::ptrdiff_t>(std::floor((shift + pulse_->duration - x.t_start) * fs)) + 1,
      0, n);
  if (hi <= lo) return 0.0;
  const auto a = static_cast<std::size_t>(lo);
  const auto b = static_cast<std::size_t>(hi);
  const double w = kTwoPi * pulse_->center_frequency;
  const double s0 = sum0_[b] - sum0_[a];
  const double sc = sumc_[b] - sumc_[a];
  const double ss = sums_[b] - sums_[a];
  return pulse_->amplitude * (s0 - std::cos(w * shift) * sc - std::sin(w * shift) * ss) / fs;
}

}  // namespace qsvlp
