#include "qsvlp/estimators.hpp"

#include "qsvlp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qsvlp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> axis(double lo, double hi, double step) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
  return out;
}

struct Candidate {
  double value = -kInf;  // larger is better
  Vec3 position = Vec3::Zero();
  double offset = 0.0;
};

/// Best `count` candidates, each at least `separation` from those already taken.
std::vector<Candidate> pick_starts(std::vector<Candidate> all, int count, double separation) {
  std::stable_sort(all.begin(), all.end(),
                   [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
  std::vector<Candidate> out;
  for (const auto& c : all) {
    if (!std::isfinite(c.value)) break;
    const bool far = std::all_of(out.begin(), out.end(), [&](const Candidate& o) {
      return (o.position - c.position).norm() >= separation;
    });
    if (far) out.push_back(c);
    if (static_cast<int>(out.size()) >= count) break;
  }
  return out;
}

struct Region {
  Vec3 lo;
  Vec3 hi;
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

Region refine_region(const ReceiverKnowledge& meta, const SearchConfig& search) {
  const Vec3 pad = Vec3::Constant(search.region_margin);
  return {meta.room.min_corner - pad, meta.room.max_corner + pad};
}

double carrier_frequency(const ReceiverKnowledge& meta) {
  double fc = 0.0;
  for (const auto& p : meta.pulses) fc = std::max(fc, p.center_frequency);
  return fc;
}

int spatial_dims(const ReceiverKnowledge& meta) { return meta.mode == Mode::TwoD ? 2 : 3; }

Vec3 to_position(const ReceiverKnowledge& meta, const Eigen::VectorXd& u) {
  return meta.mode == Mode::TwoD ? Vec3(u[0], u[1], meta.known_height) : Vec3(u[0], u[1], u[2]);
}

std::vector<Vec3> spatial_grid(const ReceiverKnowledge& meta, double step) {
  const auto xs = axis(meta.room.min_corner.x(), meta.room.max_corner.x(), step);
  const auto ys = axis(meta.room.min_corner.y(), meta.room.max_corner.y(), step);
  const auto zs = meta.mode == Mode::TwoD
                      ? std::vector<double>{meta.known_height}
                      : axis(meta.room.min_corner.z(), meta.room.max_corner.z(), step);
  std::vector<Vec3> out;
  out.reserve(xs.size() * ys.size() * zs.size());
  for (double z : zs)
    for (double y : ys)
      for (double x : xs) out.emplace_back(x, y, z);
  return out;
}

struct LinkAtCandidate {
  double alpha = 0.0;
  double delay = 0.0;
};

/// alpha_i and propagation delays at a candidate; alpha = 0 for links
/// without line of sight or coincident positions.
std::vector<LinkAtCandidate> links_at(const ReceiverKnowledge& meta, const Vec3& p) {
  std::vector<LinkAtCandidate> out(meta.leds.size());
  const VlcReceiver rx = moved(meta.receiver, p);
  for (std::size_t i = 0; i < meta.leds.size(); ++i) {
    const double d = (p - meta.leds[i].position).norm();
    if (!(d > 0.0)) continue;
    out[i].alpha = attenuation(rx, meta.leds[i]);
    out[i].delay = d / kSpeedOfLight;
  }
  return out;
}

/// Correlator-backed evaluation of the direct objective.
class DirectObjective {
 public:
  explicit DirectObjective(const ReceivedSignalSet& rs) : rs_(rs) {
    const auto n = rs.meta.leds.size();
    if (rs.signals.size() != n || rs.meta.pulses.size() != n)
      throw ConfigError("need one received signal and one pulse per LED");
    correlators_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      correlators_.emplace_back(rs.signals[i], rs.meta.pulses[i]);
      energy_.push_back(energy_integrals(rs.meta.pulses[i]).e2);
    }
  }

  double exact(const std::vector<LinkAtCandidate>& links, double offset) const {
    const double rp = rs_.meta.receiver.responsivity;
    double acc = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (!(links[i].alpha > 0.0)) continue;
      const double tau = links[i].delay + offset;
      if (!correlators_[i].admissible(tau)) return -kInf;
      any = true;
      const double a = links[i].alpha;
      acc += a * correlators_[i](tau) - 0.5 * rp * a * a * energy_[i];
    }
    return any ? acc : -kInf;
  }

  /// Sample-resolution correlation tables for the coarse grid.
  void build_tables() {
    tables_.clear();
    for (const auto& c : correlators_) {
      Table t;
      t.base = c.min_shift();
      t.rate = c.signal().sample_rate;
      const auto n = static_cast<std::size_t>(std::floor((c.max_shift() - c.min_shift()) * t.rate)) + 1;
      t.values.resize(n);
      for (std::size_t k = 0; k < n; ++k)
        t.values[k] = c(std::min(c.max_shift(), t.base + static_cast<double>(k) / t.rate));
      tables_.push_back(std::move(t));
    }
  }

  double coarse(const std::vector<LinkAtCandidate>& links, double offset) const {
    const double rp = rs_.meta.receiver.responsivity;
    double acc = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (!(links[i].alpha > 0.0)) continue;
      const Table& t = tables_[i];
      const double u = (links[i].delay + offset - t.base) * t.rate;
      if (u < 0.0 || u > static_cast<double>(t.values.size() - 1)) return -kInf;
      const auto k = std::min(static_cast<std::size_t>(u), t.values.size() - 2);
      const double w = u - static_cast<double>(k);
      const double corr = (1.0 - w) * t.values[k] + w * t.values[k + 1];
      const double a = links[i].alpha;
      any = true;
      acc += a * corr - 0.5 * rp * a * a * energy_[i];
    }
    return any ? acc : -kInf;
  }

 private:
  struct Table {
    double base = 0.0;
    double rate = 1.0;
    std::vector<double> values;
  };

  const ReceivedSignalSet& rs_;
  std::vector<Correlator> correlators_;
  std::vector<double> energy_;
  std::vector<Table> tables_;
};

/// Distance from `best` to the farthest local optimum that is statistically
/// tied with it (log-likelihood gap below one nat).
double tied_spread(const std::vector<Candidate>& optima, const Candidate& best, double nats_per_unit) {
  double spread = 0.0;
  for (const auto& o : optima) {
    if (!std::isfinite(o.value)) continue;
    const double gap = best.value - o.value;
    const bool tied = nats_per_unit > 0.0 ? gap * nats_per_unit < 1.0
                                          : gap <= 1e-9 * std::abs(best.value);
    if (tied) spread = std::max(spread, (o.position - best.position).norm());
  }
  return spread;
}

}  // namespace

ReceiverKnowledge receiver_knowledge(const Scenario& s) {
  ReceiverKnowledge k;
  k.leds = s.leds;
  k.receiver = s.receiver;
  k.pulses = s.pulses;
  k.psd = s.noise.psd;
  k.room = s.room;
  k.mode = s.mode;
  k.known_height = s.receiver.position.z();
  return k;
}

double log_likelihood_objective(const ReceivedSignalSet& rs, const Vec3& position, double offset) {
  const auto& meta = rs.meta;
  if (rs.signals.size() != meta.leds.size() || meta.pulses.size() != meta.leds.size())
    throw ConfigError("need one received signal and one pulse per LED");
  const double rp = meta.receiver.responsivity;
  const auto links = links_at(meta, position);
  double acc = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (!(links[i].alpha > 0.0)) continue;
    const double tau = links[i].delay + offset;
    if (!shift_admissible(rs.signals[i], meta.pulses[i], tau)) return -kInf;
    any = true;
    const double a = links[i].alpha;
    acc += a * integrate_product(rs.signals[i], meta.pulses[i], tau) -
           0.5 * rp * a * a * energy_integrals(meta.pulses[i]).e2;
  }
  return any ? acc : -kInf;
}

PositionEstimate direct_ml(const ReceivedSignalSet& rs, const SearchConfig& search) {
  if (auto v = search.violations(); !v.empty()) throw ConfigError(v.front());
  const ReceiverKnowledge& meta = rs.meta;
  DirectObjective objective(rs);
  objective.build_tables();

  PositionEstimate est;
  if (meta.leds.size() < 3)
    est.diagnostics.warnings.push_back("fewer than 3 LEDs: position may be unobservable");

  const double fc = carrier_frequency(meta);
  double duration = 0.0;
  for (const auto& p : meta.pulses) duration = std::max(duration, p.duration);
  const double offset_step = fc > 0.0 ? search.offset_grid_cycles / fc : duration / 32.0;
  const auto offsets = axis(search.offset_min, search.offset_max, offset_step);

  // Coarse grid: best offset per spatial point.
  std::vector<Candidate> grid;
  for (const Vec3& p : spatial_grid(meta, search.direct_grid_step)) {
    const auto links = links_at(meta, p);
    Candidate c;
    c.position = p;
    for (double off : offsets) {
      const double v = objective.coarse(links, off);
      if (v > c.value) {
        c.value = v;
        c.offset = off;
      }
    }
    // A grid offset can miss the lobe peak by a quarter period, which
    // suppresses the true location; polish the offset between neighbours.
    if (std::isfinite(c.value)) {
      const auto polished = golden_section_max(
          [&](double off) { return objective.coarse(links, off); },
          std::max(search.offset_min, c.offset - offset_step),
          std::min(search.offset_max, c.offset + offset_step), offset_step / 32.0, 16);
      if (polished.f > c.value) {
        c.value = polished.f;
        c.offset = polished.x;
      }
    }
    grid.push_back(c);
  }
  const auto starts = pick_starts(std::move(grid), search.direct_starts, 2.0 * search.direct_grid_step);
  if (starts.empty()) throw EstimationError("direct estimator: no grid point has a finite objective");

  const int dims = spatial_dims(meta);
  const Region region = refine_region(meta, search);
  auto to_vec = [&](const Vec3& p, double off) {
    Eigen::VectorXd u(dims + 1);
    for (int k = 0; k < dims; ++k) u[k] = p[k];
    u[dims] = off * kSpeedOfLight;
    return u;
  };
  auto cost = [&](const Eigen::VectorXd& u) {
    const Vec3 p = to_position(meta, u);
    const double off = u[dims] / kSpeedOfLight;
    if (!region.contains(p) || off < search.offset_min || off > search.offset_max) return kInf;
    return -objective.exact(links_at(meta, p), off);
  };
  NelderMeadOptions nm;
  nm.initial_step = Eigen::VectorXd::Constant(dims + 1, 0.5 * search.direct_grid_step);
  nm.initial_step[dims] = 0.5 * offset_step * kSpeedOfLight;
  nm.x_tolerance = Eigen::VectorXd::Constant(dims + 1, search.position_tolerance);
  nm.x_tolerance[dims] = search.offset_tolerance * kSpeedOfLight;
  nm.max_evaluations = search.max_evaluations;

  std::vector<Candidate> optima;
  bool all_converged = true;
  auto refine = [&](const Vec3& p, double off) {
    const auto r = nelder_mead(cost, to_vec(p, off), nm);
    est.diagnostics.evaluations += r.evaluations;
    est.diagnostics.restarts += 1;
    all_converged = all_converged && r.converged;
    Candidate c{-r.f, to_position(meta, r.x), r.x[dims] / kSpeedOfLight};
    optima.push_back(c);
    return c;
  };

  Candidate best;
  for (const auto& s : starts) {
    const Candidate c = refine(s.position, s.offset);
    if (c.value > best.value) best = c;
  }
  // Correlator sidelobes one carrier period apart are nearly as tall as the
  // main lobe; probe neighbouring lobes of the winner.
  if (fc > 0.0 && search.lobe_hops > 0) {
    for (int round = 0; round < 4; ++round) {
      bool improved = false;
      const Candidate anchor = best;
      for (int k = -search.lobe_hops; k <= search.lobe_hops; ++k) {
        if (k == 0) continue;
        const double off = anchor.offset + k / fc;
        if (off < search.offset_min || off > search.offset_max) continue;
        const Candidate c = refine(anchor.position, off);
        if (c.value > best.value) {
          best = c;
          improved = true;
        }
      }
      if (!improved) break;
    }
  }
  if (!std::isfinite(best.value)) throw EstimationError("direct estimator: refinement failed");

  const double nats = meta.psd > 0.0 ? meta.receiver.responsivity / meta.psd : 0.0;
  est.position = best.position;
  est.offset = best.offset;
  est.objective_value = best.value;
  est.diagnostics.converged = all_converged;
  est.diagnostics.restart_disagreement = tied_spread(optima, best, nats);
  est.diagnostics.multimodal = est.diagnostics.restart_disagreement > search.multimodal_distance;
  return est;
}

ToaEstimate estimate_toa(const SampledSignal& sig, const PulseSpec& p, double shift_min,
                         double shift_max, double psd, double low_confidence_ratio) {
  const Correlator corr(sig, p);
  const double lo = std::max(shift_min, corr.min_shift());
  const double hi = std::min(shift_max, corr.max_shift());
  if (!(hi >= lo)) throw DomainError("no admissible shift for the TOA search");
  const double dt = 1.0 / sig.sample_rate;
  const auto first = static_cast<long>(std::ceil((lo - sig.t_start) * sig.sample_rate - 1e-9));
  const auto last = static_cast<long>(std::floor((hi - sig.t_start) * sig.sample_rate + 1e-9));
  std::vector<double> shifts;
  for (long k = first; k <= last; ++k) {
    const double s = std::clamp(sig.t_start + static_cast<double>(k) * dt, lo, hi);
    if (corr.admissible(s)) shifts.push_back(s);
  }
  if (shifts.empty()) shifts.push_back(lo);
  std::vector<double> values(shifts.size());
  std::size_t best = 0;
  for (std::size_t k = 0; k < shifts.size(); ++k) {
    values[k] = corr(shifts[k]);
    if (values[k] > values[best]) best = k;  // strict: earliest shift wins ties
  }

  ToaEstimate out;
  out.tau = shifts[best];
  out.peak = values[best];
  if (best > 0 && best + 1 < shifts.size()) {
    const double ym = values[best - 1];
    const double y0 = values[best];
    const double yp = values[best + 1];
    const double denom = ym - 2.0 * y0 + yp;
    if (denom < 0.0) {
      const double delta = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
      const double t = shifts[best] + delta * dt;
      // Polish on the continuous correlator within one sample of the peak.
      const double a = std::max(lo, t - dt);
      const double b = std::min(hi, t + dt);
      const auto g = golden_section_max([&](double s) { return corr(s); }, a, b, 1e-6 * dt);
      const double interp = corr(t);
      if (g.f >= interp) {
        out.tau = g.x;
        out.peak = g.f;
      } else {
        out.tau = t;
        out.peak = interp;
      }
    }
  }
  const double e2 = energy_integrals(p).e2;
  if (out.peak <= 0.0)
    out.low_confidence = true;
  else if (psd > 0.0)
    out.low_confidence = std::sqrt(psd * e2) / out.peak > low_confidence_ratio;
  return out;
}

double estimate_rss(const SampledSignal& sig, const PulseSpec& p, double tau_hat,
                    double responsivity) {
  return integrate_product(sig, p, tau_hat) / (responsivity * energy_integrals(p).e2);
}

Eigen::VectorXd form_tdoa(std::span<const double> tau_hat, std::size_t reference) {
  if (tau_hat.size() < 2) throw ConfigError("TDOA needs at least two TOA estimates");
  if (reference >= tau_hat.size()) throw ConfigError("reference index out of range");
  Eigen::VectorXd d(static_cast<Eigen::Index>(tau_hat.size() - 1));
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < tau_hat.size(); ++i)
    if (i != reference) d[k++] = tau_hat[i] - tau_hat[reference];
  return d;
}

FirstStepEstimates first_step(const ReceivedSignalSet& rs, const SearchConfig& search) {
  const auto& meta = rs.meta;
  const std::size_t n = meta.leds.size();
  if (rs.signals.size() != n || meta.pulses.size() != n)
    throw ConfigError("need one received signal and one pulse per LED");
  FirstStepEstimates fs;
  fs.reference = search.reference_led;
  fs.tau_hat.resize(static_cast<Eigen::Index>(n));
  fs.alpha_hat.resize(static_cast<Eigen::Index>(n));
  fs.correlator_peaks.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sig = rs.signals[i];
    const auto& p = meta.pulses[i];
    const ToaEstimate t = estimate_toa(sig, p, sig.t_start, sig.t_end - p.duration, meta.psd,
                                       search.low_confidence_ratio);
    const auto ii = static_cast<Eigen::Index>(i);
    fs.tau_hat[ii] = t.tau;
    fs.correlator_peaks[ii] = t.peak;
    fs.alpha_hat[ii] = t.peak / (meta.receiver.responsivity * energy_integrals(p).e2);
    fs.low_confidence.push_back(t.low_confidence);
  }
  fs.d_hat = form_tdoa(std::span<const double>(fs.tau_hat.data(), n), fs.reference);
  return fs;
}

FusionModel fusion_covariances(const Vec3& position, const ReceiverKnowledge& meta,
                               std::size_t reference) {
  const std::size_t n = meta.leds.size();
  if (n < 2) throw ConfigError("fusion model needs at least two LEDs");
  if (reference >= n) throw ConfigError("reference index out of range");
  const double sigma2 = meta.weighting_psd();
  const double rp2 = meta.receiver.responsivity * meta.receiver.responsivity;
  const auto links = links_at(meta, position);
  std::vector<EnergyIntegrals> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = energy_integrals(meta.pulses[i]);
    if (e[i].e3 != 0.0) throw ConfigError("fusion model requires E3 = 0 pulses");
    if (!(links[i].alpha > 0.0))
      throw DomainError("candidate link " + std::to_string(i) + " has zero attenuation");
  }
  auto timing_var = [&](std::size_t i) {
    return sigma2 / (rp2 * links[i].alpha * links[i].alpha * e[i].e1);
  };
  FusionModel m;
  const auto nd = static_cast<Eigen::Index>(n - 1);
  m.sigma_d = Eigen::MatrixXd::Constant(nd, nd, timing_var(reference));
  m.sigma_alpha.resize(static_cast<Eigen::Index>(n));
  m.mu.resize(nd + static_cast<Eigen::Index>(n));
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    m.sigma_alpha[static_cast<Eigen::Index>(i)] = sigma2 / (rp2 * e[i].e2);
    m.mu[nd + static_cast<Eigen::Index>(i)] = links[i].alpha;
    if (i == reference) continue;
    m.sigma_d(k, k) += timing_var(i);
    m.mu[k] = links[i].delay - links[reference].delay;
    ++k;
  }
  return m;
}

double two_step_objective(const FirstStepEstimates& fs, const ReceiverKnowledge& meta,
                          const Vec3& position) {
  const std::size_t n = meta.leds.size();
  const std::size_t ref = fs.reference;
  const double sigma2 = meta.weighting_psd();
  const double rp2 = meta.receiver.responsivity * meta.receiver.responsivity;
  const auto links = links_at(meta, position);
  for (const auto& l : links)
    if (!(l.alpha > 0.0)) return kInf;

  Eigen::VectorXd diag(static_cast<Eigen::Index>(n - 1));
  Eigen::VectorXd resid(static_cast<Eigen::Index>(n - 1));
  double rss_term = 0.0;
  double ref_var = 0.0;
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const EnergyIntegrals e = energy_integrals(meta.pulses[i]);
    const double a = links[i].alpha;
    const double ra = fs.alpha_hat[static_cast<Eigen::Index>(i)] - a;
    rss_term += ra * ra * rp2 * e.e2 / sigma2;
    const double var = sigma2 / (rp2 * a * a * e.e1);
    if (i == ref) {
      ref_var = var;
      continue;
    }
    diag[k] = var;
    resid[k] = fs.d_hat[k] - (links[i].delay - links[ref].delay);
    ++k;
  }
  const DiagonalPlusRankOne sigma_d(diag, ref_var);
  // Without noise the quadratic terms dominate any log-determinant, so the
  // limit is plain weighted least squares.
  const double log_det = meta.psd > 0.0 ? sigma_d.log_determinant() : 0.0;
  return log_det + sigma_d.quadratic_form(resid) + rss_term;
}

PositionEstimate two_step_ml(const FirstStepEstimates& fs, const ReceiverKnowledge& meta,
                             const SearchConfig& search) {
  if (auto v = search.violations(); !v.empty()) throw ConfigError(v.front());
  const std::size_t n = meta.leds.size();
  if (n < 2) throw ConfigError("two-step estimator needs at least two LEDs");
  if (static_cast<std::size_t>(fs.alpha_hat.size()) != n ||
      static_cast<std::size_t>(fs.d_hat.size()) != n - 1)
    throw ConfigError("first-step estimates do not match the LED count");
  for (const auto& p : meta.pulses)
    if (energy_integrals(p).e3 != 0.0) throw ConfigError("two-step fusion requires E3 = 0 pulses");

  PositionEstimate est;
  if (n < 3) est.diagnostics.warnings.push_back("fewer than 3 LEDs: position may be unobservable");
  for (std::size_t i = 0; i < fs.low_confidence.size(); ++i)
    if (fs.low_confidence[i])
      est.diagnostics.warnings.push_back("low-confidence TOA on LED " + std::to_string(i));

  std::vector<Candidate> grid;
  for (const Vec3& p : spatial_grid(meta, search.two_step_grid_step))
    grid.push_back({-two_step_objective(fs, meta, p), p, 0.0});
  const auto starts =
      pick_starts(std::move(grid), search.two_step_starts, 1.5 * search.two_step_grid_step);
  if (starts.empty()) throw EstimationError("two-step estimator: no grid point has a finite objective");

  const int dims = spatial_dims(meta);
  const Region region = refine_region(meta, search);
  auto cost = [&](const Eigen::VectorXd& u) {
    const Vec3 p = to_position(meta, u);
    if (!region.contains(p)) return kInf;
    return two_step_objective(fs, meta, p);
  };
  NelderMeadOptions nm;
  nm.initial_step = Eigen::VectorXd::Constant(dims, 0.5 * search.two_step_grid_step);
  nm.x_tolerance = Eigen::VectorXd::Constant(dims, search.position_tolerance);
  nm.max_evaluations = search.max_evaluations;

  std::vector<Candidate> optima;
  Candidate best;
  bool all_converged = true;
  for (const auto& s : starts) {
    const auto r = nelder_mead(cost, s.position.head(dims), nm);
    est.diagnostics.evaluations += r.evaluations;
    est.diagnostics.restarts += 1;
    all_converged = all_converged && r.converged;
    const Candidate c{-r.f, to_position(meta, r.x), 0.0};
    optima.push_back(c);
    if (c.value > best.value) best = c;
  }
  if (!std::isfinite(best.value)) throw EstimationError("two-step estimator: all starts failed");

  est.position = best.position;
  est.objective_value = -best.value;
  est.diagnostics.converged = all_converged;
  // The objective is -2 log-likelihood.
  est.diagnostics.restart_disagreement = tied_spread(optima, best, 0.5);
  est.diagnostics.multimodal = est.diagnostics.restart_disagreement > search.multimodal_distance;
  return est;
}

}  // namespace qsvlp
