// Acceptance suite: one PASS/FAIL line per criterion, with the measured
// quantities. Exit status is nonzero when any check fails, except for the
// documented known deviations listed below.

#include "qsvlp/crlb.hpp"
#include "qsvlp/csv.hpp"
#include "qsvlp/estimators.hpp"
#include "qsvlp/figures.hpp"
#include "qsvlp/geometry.hpp"
#include "qsvlp/montecarlo.hpp"

#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace qsvlp;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

/// One criterion: sub-checks plus a runtime budget.
struct Criterion {
  Criterion(int id_, std::string title_, double budget) : id(id_), title(std::move(title_)), budget_s(budget) {}

  int id = 0;
  std::string title;
  double budget_s = 0.0;  // 0 = no limit
  std::vector<std::pair<std::string, bool>> checks;
  std::vector<std::string> known_deviations;  // check labels allowed to fail
  double runtime_s = 0.0;

  void check(const std::string& label, bool ok) { checks.emplace_back(label, ok); }
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; }) &&
           (budget_s <= 0.0 || runtime_s < budget_s);
  }
  /// True when every failure is a documented deviation.
  bool only_known_failures() const {
    if (budget_s > 0.0 && runtime_s >= budget_s) return false;
    for (const auto& [label, ok] : checks)
      if (!ok && std::find(known_deviations.begin(), known_deviations.end(), label) ==
                     known_deviations.end())
        return false;
    return true;
  }
};

template <class Job>
void parallel_chunks(int n, Job job) {
  const int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([=, &job] {
      for (int i = t; i < n; i += threads) job(i);
    });
  for (auto& th : pool) th.join();
}

// ------------------------------------------------------------------ 1

void criterion_1(Criterion& c) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> count(3, 6);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    Scenario s = testing::random_scenario(rng, count(rng));
    s.mode = Mode::ThreeD;
    const Eigen::MatrixXd inv = invert_information(fim(s).fim);
    const double full = inv.topLeftCorner<3, 3>().trace();
    const double reduced = invert_information(fim_qs(s)).trace();
    worst = std::max(worst, std::abs(reduced - full) / full);
  }
  c.check(fmt("max relative difference %.3g < 1e-9 over 200 scenarios", worst), worst < 1e-9);
}

// ------------------------------------------------------------------ 2

Scenario score_scenario() {
  Scenario s = reference_scenario();
  s.leds.resize(2);
  // Every pair of FIM parameters correlates by at least 0.23 here, so each
  // entry is resolved to about 1% by the draws.
  s.leds[0].position = Vec3(2, 12, 4);
  s.leds[1].position = Vec3(3, 8, 4);
  s.receiver.position = Vec3(6.2, 2.1, 0.0);
  s.set_pulse(PulseSpec::raised_cosine(1.0, 1e-6, 1e7));
  s.search.offset_min = -5e-8;
  s.search.offset_max = 5e-8;
  return s;
}

/// Noiseless received samples of every link for parameters phi.
std::vector<std::vector<double>> mean_signals(const Scenario& s, const Vec4& phi) {
  Scenario m = s;
  m.receiver.position = phi.head<3>();
  m.offset.delta = phi[3];
  m.noise.psd = 0.0;
  std::vector<std::vector<double>> out;
  for (const auto& sig : synthesize_signals(m, 0, 0).signals) out.push_back(sig.values);
  return out;
}

void criterion_2(Criterion& c) {
  const Scenario s = score_scenario();
  const Vec4 phi(s.receiver.position.x(), s.receiver.position.y(), s.receiver.position.z(),
                 s.offset.delta);
  // Derivatives of the sampled mean by central differences, independent of
  // the analytic gradients behind fim().
  const Vec4 step(1e-4, 1e-4, 1e-4, 1e-12);
  std::vector<std::vector<std::vector<double>>> dmu(4);
  for (int j = 0; j < 4; ++j) {
    Vec4 hi = phi, lo = phi;
    hi[j] += step[j];
    lo[j] -= step[j];
    const auto a = mean_signals(s, hi);
    const auto b = mean_signals(s, lo);
    dmu[j] = a;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t k = 0; k < a[i].size(); ++k) dmu[j][i][k] = (a[i][k] - b[i][k]) / (2 * step[j]);
  }
  const auto mu = mean_signals(s, phi);
  const double var = s.noise.psd * s.sampling_rate();

  constexpr int kDraws = 400000;
  const int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<Mat4> partial(static_cast<std::size_t>(threads), Mat4::Zero());
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      Mat4 acc = Mat4::Zero();
      for (int d = t; d < kDraws; d += threads) {
        const ReceivedSignalSet rs = synthesize_signals(s, 77, static_cast<std::uint64_t>(d));
        Vec4 score = Vec4::Zero();
        for (std::size_t i = 0; i < rs.signals.size(); ++i)
          for (std::size_t k = 0; k < mu[i].size(); ++k) {
            const double r = rs.signals[i].values[k] - mu[i][k];
            for (int j = 0; j < 4; ++j) score[j] += r * dmu[j][i][k];
          }
        score /= var;
        acc += score * score.transpose();
      }
      partial[static_cast<std::size_t>(t)] = acc;
    });
  for (auto& th : pool) th.join();
  Mat4 empirical = Mat4::Zero();
  for (const auto& p : partial) empirical += p;
  empirical /= kDraws;

  const Mat4 model = fim(s).fim;
  double worst = 0.0;
  double weakest_corr = 1.0;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      worst = std::max(worst, std::abs(empirical(a, b) - model(a, b)) / std::abs(model(a, b)));
      weakest_corr = std::min(weakest_corr, std::abs(model(a, b)) / std::sqrt(model(a, a) * model(b, b)));
    }
  c.check(fmt("max entrywise relative error %.3g < 0.05 (%d draws, 2 LEDs, f_s = 16 f_c, "
              "weakest |correlation| %.2f)",
              worst, kDraws, weakest_corr),
          worst < 0.05);
}

// ------------------------------------------------------------------ 3

void criterion_3(Criterion& c) {
  const Scenario base = reference_scenario();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> xy(0.5, 14.5);
  std::uniform_real_distribution<double> z(0.0, 3.0);
  const double h = 1e-6;
  double worst_alpha = 0.0, worst_tau = 0.0;
  int done = 0;
  while (done < 100) {
    VlcReceiver rx = base.receiver;
    rx.position = Vec3(xy(rng), xy(rng), z(rng));
    for (const auto& led : base.leds) {
      if (!link_valid(rx, led)) continue;
      Vec3 fa, ft;
      for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = h;
        const VlcReceiver p = moved(rx, rx.position + e), m = moved(rx, rx.position - e);
        fa[k] = (attenuation(p, led) - attenuation(m, led)) / (2 * h);
        ft[k] = (toa(p, led) - toa(m, led)) / (2 * h);
      }
      worst_alpha = std::max(worst_alpha, (attenuation_gradient(rx, led) - fa).norm() / fa.norm());
      worst_tau = std::max(worst_tau, (toa_gradient(rx, led) - ft).norm() / ft.norm());
    }
    ++done;
  }
  c.check(fmt("attenuation gradient max relative error %.3g < 1e-6", worst_alpha), worst_alpha < 1e-6);
  c.check(fmt("TOA gradient max relative error %.3g < 1e-6", worst_tau), worst_tau < 1e-6);
}

// ------------------------------------------------------------------ 4

/// Composite Simpson rule with `n` (even) intervals.
double simpson(const std::function<double(double)>& f, double a, double b, long n) {
  const double h = (b - a) / static_cast<double>(n);
  double acc = f(a) + f(b);
  for (long k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a + static_cast<double>(k) * h);
  return acc * h / 3.0;
}

void criterion_4(Criterion& c) {
  // Every (A, f_c, T_s) of the figure sweeps for which the pulse holds an
  // integer number of carrier cycles.
  std::vector<std::pair<double, double>> fc_ts;
  for (double fc : figure_axis_values(2))
    if (std::abs(fc * 1e-6 - std::round(fc * 1e-6)) < 1e-9 && fc * 1e-6 >= 1.0) fc_ts.emplace_back(fc, 1e-6);
  for (double ts : figure_axis_values(3)) fc_ts.emplace_back(1e8, ts);
  fc_ts.emplace_back(1e7, 1e-6);
  double worst = 0.0;
  int points = 0;
  for (double a : {0.1, 1.0, 10.0})
    for (const auto& [fc, ts] : fc_ts) {
      const EnergyIntegrals e = energy_integrals(PulseSpec::raised_cosine(a, ts, fc));
      const double w = 2 * std::numbers::pi * fc;
      const long n = 2 * static_cast<long>(std::llround(fc * ts)) * 32;
      const double q2 = simpson([&](double t) { return std::pow(a * (1 - std::cos(w * t)), 2); }, 0, ts, n);
      const double q1 = simpson([&](double t) { return std::pow(a * w * std::sin(w * t), 2); }, 0, ts, n);
      const double q3 = simpson([&](double t) { return a * (1 - std::cos(w * t)) * a * w * std::sin(w * t); }, 0, ts, n);
      worst = std::max({worst, std::abs(e.e2 - q2) / q2, std::abs(e.e1 - q1) / q1,
                        std::abs(e.e3 - q3) / std::sqrt(q1 * q2)});
      worst = std::max({worst, std::abs(e.e2 - 1.5 * a * a * ts) / q2,
                        std::abs(e.e1 - 4.0 / 3.0 * std::pow(std::numbers::pi * fc, 2) * e.e2) / q1});
      ++points;
    }
  c.check(fmt("max relative error %.3g < 1e-6 over %d grid points (E3 relative to sqrt(E1 E2))", worst,
              points),
          worst < 1e-6);
}

// ------------------------------------------------------------ 5 and 6

struct FirstStepSamples {
  std::vector<Eigen::VectorXd> tau, alpha, d;
};

FirstStepSamples first_step_samples(const Scenario& s, int n) {
  FirstStepSamples out;
  out.tau.resize(static_cast<std::size_t>(n));
  out.alpha.resize(static_cast<std::size_t>(n));
  out.d.resize(static_cast<std::size_t>(n));
  parallel_chunks(n, [&](int t) {
    const FirstStepEstimates f = first_step(synthesize_signals(s, 55, static_cast<std::uint64_t>(t)), s.search);
    out.tau[static_cast<std::size_t>(t)] = f.tau_hat;
    out.alpha[static_cast<std::size_t>(t)] = f.alpha_hat;
    out.d[static_cast<std::size_t>(t)] = f.d_hat;
  });
  return out;
}

Scenario high_snr_scenario() {
  Scenario s = reference_scenario();
  s.set_pulse(PulseSpec::raised_cosine(10.0, 1e-6, 1e8));
  return s;
}

Eigen::MatrixXd sample_covariance(const std::vector<Eigen::VectorXd>& x) {
  const Eigen::Index m = x.front().size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
  for (const auto& v : x) mean += v;
  mean /= static_cast<double>(x.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
  for (const auto& v : x) cov += (v - mean) * (v - mean).transpose();
  return cov / static_cast<double>(x.size() - 1);
}

void criterion_5(Criterion& c, const FirstStepSamples& fs) {
  const Scenario s = high_snr_scenario();
  const double rp = s.receiver.responsivity, a = 10.0, ts = 1e-6, fc = 1e8, psd = s.noise.psd;
  const Eigen::MatrixXd ct = sample_covariance(fs.tau);
  const Eigen::MatrixXd ca = sample_covariance(fs.alpha);
  double worst_alpha = 0.0, worst_tau = 0.0;
  for (std::size_t i = 0; i < s.leds.size(); ++i) {
    const double alpha = attenuation(s.receiver, s.leds[i]);
    const double bound_alpha = 2 * psd / (3 * rp * rp * a * a * ts);
    const double bound_tau =
        psd / (2 * std::pow(std::numbers::pi, 2) * alpha * alpha * rp * rp * fc * fc * a * a * ts);
    const auto ii = static_cast<Eigen::Index>(i);
    worst_alpha = std::max(worst_alpha, std::abs(ca(ii, ii) / bound_alpha - 1));
    worst_tau = std::max(worst_tau, std::abs(ct(ii, ii) / bound_tau - 1));
  }
  c.check(fmt("var(alpha_hat) max deviation from bound %.1f%% < 15%%", 100 * worst_alpha), worst_alpha < 0.15);
  c.check(fmt("var(tau_hat) max deviation from bound %.1f%% < 15%%", 100 * worst_tau), worst_tau < 0.15);
}

void criterion_6(Criterion& c, const FirstStepSamples& fs) {
  const Scenario s = high_snr_scenario();
  const std::size_t n = s.leds.size();
  const auto nd = static_cast<Eigen::Index>(n - 1);
  std::vector<Eigen::VectorXd> joint;
  for (std::size_t t = 0; t < fs.d.size(); ++t) {
    Eigen::VectorXd v(nd + static_cast<Eigen::Index>(n));
    v << fs.d[t], fs.alpha[t];
    joint.push_back(v);
  }
  const Eigen::MatrixXd emp = sample_covariance(joint);
  const FusionModel model = fusion_covariances(s.receiver.position, receiver_knowledge(s), 0);
  const Eigen::Index m = emp.rows();
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(m, m);
  ref.topLeftCorner(nd, nd) = model.sigma_d;
  ref.bottomRightCorner(m - nd, m - nd) = model.sigma_alpha.asDiagonal();
  const auto samples = static_cast<double>(joint.size());

  double worst_rel = 0.0, worst_se = 0.0;
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = a; b < m; ++b) {
      if (ref(a, b) != 0.0) {
        worst_rel = std::max(worst_rel, std::abs(emp(a, b) / ref(a, b) - 1));
      } else {
        // Standard error of a sample covariance whose true value is zero.
        const double se = std::sqrt(emp(a, a) * emp(b, b) / samples);
        worst_se = std::max(worst_se, std::abs(emp(a, b)) / se);
      }
    }
  const double ref_term = model.sigma_d(0, 1);
  double worst_offdiag = 0.0;
  bool model_equal = true;
  for (Eigen::Index a = 0; a < nd; ++a)
    for (Eigen::Index b = 0; b < nd; ++b)
      if (a != b) {
        model_equal = model_equal && model.sigma_d(a, b) == ref_term;
        worst_offdiag = std::max(worst_offdiag, std::abs(emp(a, b) / ref_term - 1));
      }
  c.check(fmt("nonzero model entries max deviation %.1f%% < 15%%", 100 * worst_rel), worst_rel < 0.15);
  c.check(fmt("zero model entries within %.2f < 3 standard errors", worst_se), worst_se < 3.0);
  c.check(fmt("Sigma_d off-diagonals equal the reference term (model exact: %s, empirical max "
              "deviation %.1f%%)",
              model_equal ? "yes" : "no", 100 * worst_offdiag),
          model_equal && worst_offdiag < 0.15);
}

// ------------------------------------------------------------------ 7

void criterion_7(Criterion& c) {
  for (Mode mode : {Mode::TwoD, Mode::ThreeD})
    for (double fc : {1e7, 1e8}) {
      Scenario s = reference_scenario();
      s.mode = mode;
      s.set_pulse(PulseSpec::raised_cosine(10.0, 1e-6, fc));
      const double bound = sqrt_crlb(s);
      for (EstimatorKind e : {EstimatorKind::Direct, EstimatorKind::TwoStep}) {
        const TrialSummary r = run_trials(s, e, 200, 1);
        const double ratio = r.rmse / bound;
        c.check(fmt("%s f_c=%.0e %s: RMSE %.4g m, sqrt-CRLB %.4g m, ratio %.3f (failures %d)",
                    to_string(mode), fc, to_string(e), r.rmse, bound, ratio, r.failures),
                r.failures == 0 && std::abs(ratio - 1) <= 0.25);
      }
    }
  Scenario low = reference_scenario();
  low.set_pulse(PulseSpec::raised_cosine(0.1, 1e-6, 1e8));
  const TrialSummary d = run_trials(low, EstimatorKind::Direct, 200, 1);
  const TrialSummary t = run_trials(low, EstimatorKind::TwoStep, 200, 1);
  c.check(fmt("A=0.1 W threshold effect: two-step RMSE %.3g m > direct RMSE %.3g m", t.rmse, d.rmse),
          t.rmse > d.rmse);
}

// ------------------------------------------------------------------ 8

void criterion_8(Criterion& c) {
  const Scenario s = reference_scenario();
  {
    const double at_default = sqrt_crlb(s);
    const auto surf = crlb_surface(s, 0.25);
    double corner_min = 1e300, interior_max = 0.0;
    for (const auto& p : surf) {
      if (!p.sqrt_crlb) continue;
      const bool corner = (p.x < 1 || p.x > 14) && (p.y < 1 || p.y > 14);
      const bool interior = p.x >= 5 && p.x <= 10 && p.y >= 5 && p.y <= 10;
      if (corner) corner_min = std::min(corner_min, *p.sqrt_crlb);
      if (interior) interior_max = std::max(interior_max, *p.sqrt_crlb);
    }
    c.check(fmt("(a) sqrt-CRLB at [6,5.75,0] = %.4g m <= 0.2 m", at_default), at_default <= 0.2);
    c.check(fmt("(a) smallest corner value %.3g m / largest interior value %.3g m = %.1f > 5", corner_min,
                interior_max, corner_min / interior_max),
            corner_min > 5 * interior_max);
  }
  {
    bool flat = true, decreasing = true;
    double worst_flat = 0.0;
    for (double a : {0.1, 1.0, 10.0}) {
      auto at = [&](double fc) {
        Scenario v = s;
        v.set_pulse(PulseSpec::raised_cosine(a, 1e-6, fc));
        return sqrt_crlb(v);
      };
      const double dev = std::abs(at(1e5) / at(1e6) - 1);
      worst_flat = std::max(worst_flat, dev);
      flat = flat && dev < 0.01;
      double prev = 1e300;
      for (double fc : figure_axis_values(2)) {
        if (fc < 1e7) continue;
        const double v = at(fc);
        decreasing = decreasing && v < prev;
        prev = v;
      }
    }
    c.check(fmt("(b) f_c 1e5 vs 1e6 Hz differ by %.3f%% < 1%%", 100 * worst_flat), flat);
    c.check("(b) strictly decreasing from 1e7 to 1e9 Hz", decreasing);
  }
  {
    const SweepResult r = sweep(s, SweepAxis::PulseDuration, figure_axis_values(3), {}, 1, 1);
    bool decreasing = true;
    for (std::size_t k = 1; k < r.points.size(); ++k)
      decreasing = decreasing && *r.points[k].sqrt_crlb < *r.points[k - 1].sqrt_crlb;
    const double ratio = sqrt_crlb(apply_axis(s, SweepAxis::PulseDuration, 4e-6)) /
                         sqrt_crlb(apply_axis(s, SweepAxis::PulseDuration, 1e-6));
    c.check("(c) monotone decreasing in T_s", decreasing);
    c.check(fmt("(c) sqrt-CRLB(4 T_s)/sqrt-CRLB(T_s) = %.9f (0.5 within 1e-6)", ratio),
            std::abs(ratio - 0.5) < 1e-6);
  }
  {
    const double ratio = sqrt_crlb(apply_axis(s, SweepAxis::Power, 4.0)) /
                         sqrt_crlb(apply_axis(s, SweepAxis::Power, 1.0));
    const std::string label = fmt("(d) sqrt-CRLB(4A)/sqrt-CRLB(A) = %.9f (0.5 within 1e-6)", ratio);
    c.check(label, std::abs(ratio - 0.5) < 1e-6);
    c.known_deviations.push_back(label);
  }
  {
    const auto theta = figure_axis_values(6);
    for (double fc : {1e7, 1e8}) {
      Scenario base = s;
      base.set_pulse(PulseSpec::raised_cosine(1.0, 1e-6, fc));
      const SweepResult r = sweep(base, SweepAxis::TiltAngle, theta, {}, 1, 1);
      std::size_t best = 0;
      for (std::size_t k = 0; k < r.points.size(); ++k)
        if (r.points[k].sqrt_crlb && *r.points[k].sqrt_crlb < *r.points[best].sqrt_crlb) best = k;
      const double at0 = *r.points[0].sqrt_crlb, lo = *r.points[best].sqrt_crlb;
      c.check(fmt("(e) f_c=%.0e: minimum %.4g m at theta=%.3f rad vs %.4g m at 0 (%.1f%% lower, < 20%%)",
                  fc, lo, theta[best], at0, 100 * (1 - lo / at0)),
              best != 0 && lo >= 0.8 * at0);
    }
  }
}

// ------------------------------------------------------------------ 9

void criterion_9(Criterion& c) {
  const Scenario a = high_snr_scenario();
  Scenario b = a;
  b.offset.delta += 1e-7;
  // The receiver observes on its own clock: the window moves with the offset,
  // so both runs see identical samples.
  ObservationWindow wb = a.window();
  wb.t_start += 1e-7;
  wb.t_end += 1e-7;
  std::vector<double> change(20);
  parallel_chunks(20, [&](int k) {
    const auto seed = static_cast<std::uint64_t>(100 + k);
    const Vec3 pa = run_estimator(EstimatorKind::TwoStep, synthesize_signals(a, seed, 0), a.search).position;
    const Vec3 pb = run_estimator(EstimatorKind::TwoStep, synthesize_signals(b, seed, 0, wb), b.search).position;
    change[static_cast<std::size_t>(k)] = (pa - pb).norm();
  });
  const double worst = *std::max_element(change.begin(), change.end());
  c.check(fmt("max position change %.3g m < solver tolerance %.0e m over 20 seeds", worst,
              a.search.position_tolerance),
          worst < a.search.position_tolerance);
}

// ----------------------------------------------------------------- 10

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_10(Criterion& c, const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / "qsvlp_acceptance_figures";
  fs::remove_all(root);
  for (int id = 1; id <= kFigureCount; ++id) {
    const fs::path first = root / ("run1_" + std::to_string(id));
    const fs::path second = root / ("run2_" + std::to_string(id));
    const std::string name = "fig" + std::to_string(id);
    const std::string cmd1 = cli + " --seed 7 --trials 3 --threads 4 --out " + first.string() + " figure " +
                             std::to_string(id) + " --spacing 1.0 2>/dev/null";
    const std::string cmd2 = cli + " --threads 1 --out " + second.string() + " figure --from-meta " +
                             (first / (name + ".meta.json")).string() + " 2>/dev/null";
    const bool ran = std::system(cmd1.c_str()) == 0 && std::system(cmd2.c_str()) == 0;
    const std::string a = ran ? slurp(first / (name + ".csv")) : "";
    const std::string b = ran ? slurp(second / (name + ".csv")) : "";
    c.check(fmt("figure %d regenerated from its manifest: %s (%zu bytes)", id,
                ran && !a.empty() && a == b ? "identical" : "DIFFERENT", a.size()),
            ran && !a.empty() && a == b);
  }
  fs::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "qsvlp";
  std::vector<Criterion> all = {
      {1, "Reduced-information equivalence", 10},
      {2, "FIM score outer-product oracle", 120},
      {3, "Gradient oracle", 1},
      {4, "Energy integrals", 1},
      {5, "Per-link efficiency", 300},
      {6, "First-step covariance model", 300},
      {7, "High-SNR convergence and threshold effect", 1800},
      {8, "CRLB shape checks", 300},
      {9, "Offset cancellation", 120},
      {10, "Figure reproducibility", 0},
  };
  FirstStepSamples samples;
  double samples_time = 0.0;
  for (auto& c : all) {
    const auto t0 = Clock::now();
    switch (c.id) {
      case 1: criterion_1(c); break;
      case 2: criterion_2(c); break;
      case 3: criterion_3(c); break;
      case 4: criterion_4(c); break;
      case 5: {
        samples = first_step_samples(high_snr_scenario(), 2000);
        samples_time = seconds_since(t0);
        criterion_5(c, samples);
        break;
      }
      case 6: criterion_6(c, samples); break;
      case 7: criterion_7(c); break;
      case 8: criterion_8(c); break;
      case 9: criterion_9(c); break;
      case 10: criterion_10(c, cli); break;
    }
    c.runtime_s = seconds_since(t0) + (c.id == 6 ? samples_time : 0.0);
    std::printf("%s %d %s (%.2f s%s)\n", c.passed() ? "PASS" : "FAIL", c.id, c.title.c_str(), c.runtime_s,
                c.budget_s > 0 ? fmt(", budget %.0f s", c.budget_s).c_str() : "");
    for (const auto& [label, ok] : c.checks) {
      const bool known = std::find(c.known_deviations.begin(), c.known_deviations.end(), label) !=
                         c.known_deviations.end();
      std::printf("    [%s] %s%s\n", ok ? "ok" : "failed", label.c_str(),
                  !ok && known ? "  -- known deviation: the information is quadratic in A "
                                 "(E1, E2 scale with A^2), so the bound scales as 1/A and "
                                 "quadrupling A gives 0.25"
                               : "");
    }
    std::fflush(stdout);
  }
  int passed = 0;
  bool unexpected = false;
  for (const auto& c : all) {
    passed += c.passed();
    unexpected = unexpected || !c.only_known_failures();
  }
  std::printf("%d/%zu criteria passed%s\n", passed, all.size(),
              unexpected ? "" : "; remaining failures are documented deviations");
  return unexpected ? 1 : 0;
}
