#include "qsvlp/validate.hpp"

#include "qsvlp/crlb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qsvlp {

namespace {

constexpr double kStep = 1e-6;  // m, finite-difference step

double relative(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

/// Largest relative error between an analytic gradient and central
/// differences, measured against the gradient norm.
template <class Value, class Gradient>
double gradient_error(const VlcReceiver& rx, const LedTransmitter& tx, Value value, Gradient grad) {
  const Vec3 g = grad(rx, tx);
  Vec3 fd;
  for (int k = 0; k < 3; ++k) {
    Vec3 p = rx.position;
    Vec3 m = rx.position;
    p[k] += kStep;
    m[k] -= kStep;
    fd[k] = (value(moved(rx, p), tx) - value(moved(rx, m), tx)) / (2.0 * kStep);
  }
  return (g - fd).norm() / g.norm();
}

/// Composite Simpson rule on [0, T] with n (even) intervals.
template <class F>
double simpson(F f, double T, int n) {
  const double h = T / n;
  double acc = f(0.0) + f(T);
  for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return acc * h / 3.0;
}

CheckResult gradient_check(const Scenario& s, bool attenuation_kind) {
  CheckResult r;
  r.name = attenuation_kind ? "attenuation_gradient" : "toa_gradient";
  r.tolerance = 1e-6;
  int links = 0;
  for (const auto& led : s.leds) {
    if (!link_valid(s.receiver, led)) continue;
    ++links;
    const double e = attenuation_kind
                         ? gradient_error(s.receiver, led, attenuation, attenuation_gradient)
                         : gradient_error(
                               s.receiver, led,
                               [](const VlcReceiver& rx, const LedTransmitter& tx) { return toa(rx, tx); },
                               toa_gradient);
    r.residual = std::max(r.residual, e);
  }
  if (links == 0) {
    r.status = CheckStatus::Skipped;
    r.detail = "no line-of-sight link";
    return r;
  }
  r.status = r.residual < r.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
  r.detail = std::to_string(links) + " links, central differences with step 1e-6 m";
  return r;
}

CheckResult energy_check(const Scenario& s) {
  CheckResult r;
  r.name = "energy_integrals";
  r.tolerance = 1e-6;
  for (const auto& p : s.pulses) {
    const EnergyIntegrals e = energy_integrals(p);
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;
    if (p.kind == PulseKind::RaisedCosineSinusoid) {
      const int n = 2 * std::max(1000, static_cast<int>(std::ceil(p.cycles() * 200)));
      q2 = simpson([&](double t) { return std::pow(pulse_value(p, t), 2); }, p.duration, n);
      q1 = simpson([&](double t) { return std::pow(pulse_derivative(p, t), 2); }, p.duration, n);
      q3 = simpson([&](double t) { return pulse_value(p, t) * pulse_derivative(p, t); }, p.duration, n);
    } else {
      // Piecewise-linear pulse: Simpson is exact for the quadratic s^2 on
      // each segment, and s' is constant there.
      for (std::size_t j = 1; j < p.table_times.size(); ++j) {
        const double h = p.table_times[j] - p.table_times[j - 1];
        const double a = p.table_values[j - 1];
        const double b = p.table_values[j];
        const double mid = 0.5 * (a + b);
        q2 += h * (a * a + 4.0 * mid * mid + b * b) / 6.0;
        q1 += (b - a) * (b - a) / h;
        q3 += 0.5 * (b * b - a * a);
      }
    }
    r.residual = std::max({r.residual, relative(e.e1, q1), relative(e.e2, q2),
                           std::abs(e.e3 - q3) / e.e2});
  }
  r.status = r.residual < r.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
  r.detail = "closed forms against composite quadrature";
  return r;
}

CheckResult reduced_information_check(const Scenario& s) {
  CheckResult r;
  r.name = "reduced_information_identity";
  r.tolerance = 1e-9;
  if (!(s.noise.psd > 0.0)) {
    r.status = CheckStatus::Skipped;
    r.detail = "noise psd is 0: information is unbounded";
    return r;
  }
  try {
    const FimResult f = fim(s);
    const int rank = information_rank(f.fim);
    const Mat3 jqs = fim_qs(s);
    const int rank_qs = information_rank(jqs);
    if (rank_qs < 3) {
      r.status = CheckStatus::Diagnostic;
      r.detail = "reduced information is singular (rank " + std::to_string(rank_qs) +
                 " of 3, full FIM rank " + std::to_string(rank) + " of 4) as expected for " +
                 std::to_string(s.leds.size()) + " LED(s)";
      return r;
    }
    const double lhs = invert_information(jqs).trace();
    const double rhs = crlb_full(f, Mode::ThreeD).mse_bound_trace;
    r.residual = relative(lhs, rhs);
    r.status = r.residual < r.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "trace of reduced-information inverse against the position block of the FIM inverse";
  } catch (const RankDeficientError& e) {
    r.status = CheckStatus::Diagnostic;
    r.detail = std::string("information singular: ") + e.what();
  } catch (const DomainError& e) {
    r.status = CheckStatus::Diagnostic;
    r.detail = e.what();
  }
  return r;
}

CheckResult noise_check(const Scenario& s, std::uint64_t seed) {
  CheckResult r;
  r.name = "noise_calibration";
  if (!(s.noise.psd > 0.0)) {
    r.status = CheckStatus::Skipped;
    r.detail = "noise psd is 0: nothing to calibrate";
    return r;
  }
  const double fs = s.sampling_rate();
  const ObservationWindow w = s.window();
  double sum2 = 0.0;
  std::size_t count = 0;
  for (std::uint64_t k = 0; k < 16; ++k) {
    NoiseSpec n = s.noise;
    n.seed = seed * 1315423911ULL + k;
    const SampledSignal x = synthesize_waveform(0.0, 0.0, s.pulses.front(), n, fs, w);
    for (double v : x.values) sum2 += v * v;
    count += x.size();
  }
  const double expected = s.noise.psd * fs;
  r.residual = std::abs(sum2 / static_cast<double>(count) / expected - 1.0);
  // Five standard errors of a chi-square sample variance.
  r.tolerance = 5.0 * std::sqrt(2.0 / static_cast<double>(count));
  r.status = r.residual < r.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
  r.detail = std::to_string(count) + " samples against variance psd * f_s";
  return r;
}

CheckResult rank_check(const Scenario& s) {
  CheckResult r;
  r.name = "information_rank";
  if (!(s.noise.psd > 0.0)) {
    r.status = CheckStatus::Skipped;
    r.detail = "noise psd is 0";
    return r;
  }
  try {
    const FimResult f = fim(s);
    const auto coords = free_coordinates(s.mode);
    const int needed = static_cast<int>(coords.size()) + 1;
    Eigen::MatrixXd sub(needed, needed);
    std::vector<int> idx = coords;
    idx.push_back(3);
    for (int a = 0; a < needed; ++a)
      for (int b = 0; b < needed; ++b) sub(a, b) = f.fim(idx[a], idx[b]);
    const int rank = information_rank(sub);
    r.residual = needed - rank;
    r.status = rank == needed ? CheckStatus::Pass : CheckStatus::Diagnostic;
    r.detail = "rank " + std::to_string(rank) + " of " + std::to_string(needed) + " in " +
               to_string(s.mode) + " mode";
  } catch (const DomainError& e) {
    r.status = CheckStatus::Diagnostic;
    r.detail = e.what();
  }
  return r;
}

CheckResult sync_check(const Scenario& s) {
  CheckResult r;
  r.name = "synchronous_equivalence";
  r.tolerance = 1e-9;
  try {
    const SyncEquivalence e = sync_equivalence_check(s, r.tolerance, s.mode);
    for (int k : free_coordinates(s.mode)) r.residual = std::max(r.residual, std::abs(e.residuals[k]));
    r.status = CheckStatus::Diagnostic;
    std::ostringstream os;
    os << "offset knowledge " << (e.holds ? "would not" : "would") << " tighten the bound";
    r.detail = os.str();
  } catch (const std::exception& e) {
    r.status = CheckStatus::Skipped;
    r.detail = e.what();
  }
  return r;
}

}  // namespace

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
    case CheckStatus::Diagnostic: return "diagnostic";
  }
  return "fail";
}

bool ValidationReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json out;
  out["passed"] = passed();
  out["checks"] = nlohmann::json::array();
  for (const auto& c : checks)
    out["checks"].push_back({{"name", c.name},
                             {"status", to_string(c.status)},
                             {"residual", c.residual},
                             {"tolerance", c.tolerance},
                             {"detail", c.detail}});
  return out;
}

ValidationReport validate_scenario(const Scenario& s, std::uint64_t seed) {
  ValidationReport rep;
  rep.checks.push_back(gradient_check(s, true));
  rep.checks.push_back(gradient_check(s, false));
  rep.checks.push_back(energy_check(s));
  rep.checks.push_back(reduced_information_check(s));
  rep.checks.push_back(noise_check(s, seed));
  rep.checks.push_back(rank_check(s));
  rep.checks.push_back(sync_check(s));
  return rep;
}

}  // namespace qsvlp
