#include "qsvlp/crlb.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

namespace qsvlp {

namespace {

struct LinkTerms {
  double alpha = 0.0;
  Vec3 dalpha = Vec3::Zero();
  Vec3 dtau = Vec3::Zero();
  EnergyIntegrals e;
  bool used = false;
};

std::vector<LinkTerms> link_terms(std::span<const LedTransmitter> leds, const VlcReceiver& rx,
                                  std::span<const PulseSpec> pulses,
                                  std::vector<std::string>* warnings) {
  if (pulses.size() != leds.size()) throw ConfigError("one pulse per LED required");
  std::vector<LinkTerms> out(leds.size());
  for (std::size_t i = 0; i < leds.size(); ++i) {
    LinkTerms& t = out[i];
    t.e = energy_integrals(pulses[i]);
    if (!link_valid(rx, leds[i])) {
      if (warnings) warnings->push_back("LED " + std::to_string(i) + " has no line of sight; excluded");
      continue;
    }
    t.alpha = attenuation(rx, leds[i]);
    t.dalpha = attenuation_gradient(rx, leds[i]);
    t.dtau = toa_gradient(rx, leds[i]);
    t.used = true;
  }
  return out;
}

Eigen::MatrixXd restrict_with_offset(const Mat4& j, const std::vector<int>& coords) {
  const auto n = static_cast<Eigen::Index>(coords.size()) + 1;
  Eigen::MatrixXd out(n, n);
  std::vector<int> idx = coords;
  idx.push_back(3);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) out(a, b) = j(idx[a], idx[b]);
  return out;
}

}  // namespace

FimResult fim(std::span<const LedTransmitter> leds, const VlcReceiver& rx,
              std::span<const PulseSpec> pulses, double psd) {
  if (!(psd > 0.0)) throw DomainError("Fisher information needs a positive noise level");
  FimResult r;
  const auto terms = link_terms(leds, rx, pulses, &r.warnings);
  const double scale = rx.responsivity * rx.responsivity / psd;
  bool any = false;
  for (const LinkTerms& t : terms) {
    Mat4 c = Mat4::Zero();
    r.link_used.push_back(t.used);
    if (t.used) {
      any = true;
      const double a2e1 = t.alpha * t.alpha * t.e.e1;
      const double ae3 = t.alpha * t.e.e3;
      c.topLeftCorner<3, 3>() = t.e.e2 * t.dalpha * t.dalpha.transpose() +
                                a2e1 * t.dtau * t.dtau.transpose() -
                                ae3 * (t.dalpha * t.dtau.transpose() + t.dtau * t.dalpha.transpose());
      const Vec3 cross = a2e1 * t.dtau - ae3 * t.dalpha;
      c.block<3, 1>(0, 3) = cross;
      c.block<1, 3>(3, 0) = cross.transpose();
      c(3, 3) = a2e1;
      c *= scale;
    }
    r.link_contributions.push_back(c);
    r.fim += c;
  }
  if (!any) throw DomainError("no transmitter has a line-of-sight link");
  return r;
}

FimResult fim(const Scenario& s) { return fim(s.leds, s.receiver, s.pulses, s.noise.psd); }

std::vector<int> free_coordinates(Mode mode) {
  return mode == Mode::TwoD ? std::vector<int>{0, 1} : std::vector<int>{0, 1, 2};
}

namespace {

struct ScaledEigen {
  Eigen::VectorXd scale;       // D with D info D having unit diagonal
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  double condition = 0.0;
  Eigen::VectorXd weakest;     // in original coordinates, unit norm
};

ScaledEigen scaled_eigen(const Eigen::MatrixXd& info) {
  const Eigen::Index n = info.rows();
  ScaledEigen se;
  se.scale = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(info(i, i) > 0.0)) {
      se.condition = std::numeric_limits<double>::infinity();
      se.weakest = Eigen::VectorXd::Unit(n, i);
      return se;
    }
    se.scale[i] = 1.0 / std::sqrt(info(i, i));
  }
  const Eigen::MatrixXd scaled = se.scale.asDiagonal() * info * se.scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (scaled + scaled.transpose()));
  se.eigenvalues = eig.eigenvalues();
  se.eigenvectors = eig.eigenvectors();
  const double lo = se.eigenvalues.minCoeff();
  const double hi = se.eigenvalues.maxCoeff();
  se.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  Eigen::Index imin = 0;
  se.eigenvalues.minCoeff(&imin);
  se.weakest = (se.scale.asDiagonal() * se.eigenvectors.col(imin)).normalized();
  return se;
}

std::string describe(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os.precision(4);
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

}  // namespace

Eigen::MatrixXd invert_information(const Eigen::MatrixXd& info, double max_condition) {
  const ScaledEigen se = scaled_eigen(info);
  if (!(se.condition <= max_condition)) {
    throw RankDeficientError("information matrix is rank deficient (scaled condition number " +
                                 std::to_string(se.condition) + "); null direction " +
                                 describe(se.weakest),
                             se.weakest, se.condition);
  }
  const Eigen::MatrixXd scaled_inv =
      se.eigenvectors * se.eigenvalues.cwiseInverse().asDiagonal() * se.eigenvectors.transpose();
  Eigen::MatrixXd inv = se.scale.asDiagonal() * scaled_inv * se.scale.asDiagonal();
  return 0.5 * (inv + inv.transpose());
}

int information_rank(const Eigen::MatrixXd& info, double max_condition) {
  const Eigen::Index n = info.rows();
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i) scale[i] = info(i, i) > 0.0 ? 1.0 / std::sqrt(info(i, i)) : 0.0;
  const Eigen::MatrixXd scaled = scale.asDiagonal() * info * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (scaled + scaled.transpose()));
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(hi > 0.0)) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (eig.eigenvalues()[i] * max_condition > hi) ++rank;
  return rank;
}

CrlbResult crlb_full(const FimResult& f, Mode mode) {
  const auto coords = free_coordinates(mode);
  const Eigen::MatrixXd inv = invert_information(restrict_with_offset(f.fim, coords));
  CrlbResult r;
  const auto n = static_cast<Eigen::Index>(coords.size());
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) r.position_cov_bound(coords[a], coords[b]) = inv(a, b);
  r.per_coordinate = r.position_cov_bound.diagonal();
  r.mse_bound_trace = r.position_cov_bound.trace();
  r.offset_var_bound = inv(n, n);
  return r;
}

double sqrt_crlb(const Scenario& s) {
  return std::sqrt(crlb_full(fim(s), s.mode).mse_bound_trace);
}

Mat3 fim_qs(std::span<const LedTransmitter> leds, const VlcReceiver& rx,
            std::span<const PulseSpec> pulses, double psd) {
  if (!(psd > 0.0)) throw DomainError("Fisher information needs a positive noise level");
  const auto t = link_terms(leds, rx, pulses, nullptr);
  double timing = 0.0;  // sum_i alpha_i^2 E1_i
  bool any = false;
  for (const auto& l : t) {
    if (!l.used) continue;
    any = true;
    timing += l.alpha * l.alpha * l.e.e1;
  }
  if (!any) throw DomainError("no transmitter has a line-of-sight link");
  if (!(timing > 0.0)) throw DomainError("no timing information: sum alpha^2 E1 is zero");

  Mat3 j = Mat3::Zero();
  for (int m = 0; m < 3; ++m) {
    for (int n = 0; n < 3; ++n) {
      double acc = 0.0;
      for (const auto& li : t) {
        if (!li.used) continue;
        const double ai = li.alpha;
        const double e1i = li.e.e1, e2i = li.e.e2, e3i = li.e.e3;
        for (const auto& lj : t) {
          if (!lj.used) continue;
          const double aj = lj.alpha;
          const double e1j = lj.e.e1, e3j = lj.e.e3;
          const double alpha_part =
              aj * aj * e2i * e1j * li.dalpha[n] - ai * aj * e3i * e3j * lj.dalpha[n] +
              ai * aj * aj * e3i * e1j * (lj.dtau[n] - li.dtau[n]);
          const double tau_part =
              aj * aj * e1j * (ai * ai * e1i * li.dtau[n] - ai * e3i * li.dalpha[n]) +
              ai * ai * e1i * (aj * e3j * lj.dalpha[n] - aj * aj * e1j * lj.dtau[n]);
          acc += li.dalpha[m] * alpha_part + li.dtau[m] * tau_part;
        }
      }
      j(m, n) = acc;
    }
  }
  j *= rx.responsivity * rx.responsivity / (psd * timing);
  return 0.5 * (j + j.transpose());
}

Mat3 fim_qs(const Scenario& s) { return fim_qs(s.leds, s.receiver, s.pulses, s.noise.psd); }

Eigen::MatrixXd schur_position_block(const FimResult& f, Mode mode) {
  const double jc = f.fim(3, 3);
  if (!(jc > 0.0)) throw DomainError("offset information J_c is zero");
  const auto coords = free_coordinates(mode);
  const auto n = static_cast<Eigen::Index>(coords.size());
  Eigen::MatrixXd ja(n, n);
  Eigen::VectorXd jb(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    jb[a] = f.fim(coords[a], 3);
    for (Eigen::Index b = 0; b < n; ++b) ja(a, b) = f.fim(coords[a], coords[b]);
  }
  return invert_information(ja - jb * jb.transpose() / jc);
}

SyncEquivalence sync_equivalence_check(const Scenario& s, double tol, Mode mode) {
  for (const auto& p : s.pulses)
    if (energy_integrals(p).e3 != 0.0)
      throw ConfigError("synchronous-equivalence condition is defined only for E3 = 0 pulses");
  const auto t = link_terms(s.leds, s.receiver, s.pulses, nullptr);
  Vec3 acc = Vec3::Zero();
  double total = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!t[i].used) continue;
    const double w = t[i].alpha * t[i].alpha * t[i].e.e1;
    const Vec3 diff = s.receiver.position - s.leds[i].position;
    acc += w * diff / diff.norm();
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("no timing information on any link");
  SyncEquivalence r;
  r.residuals = acc / total;
  r.holds = true;
  for (int k : free_coordinates(mode))
    if (!(std::abs(r.residuals[k]) < tol)) r.holds = false;
  return r;
}

LinkBound crlb_link(const Scenario& s, std::size_t i) {
  if (i >= s.leds.size()) throw ConfigError("LED index out of range");
  if (!(s.noise.psd > 0.0)) throw DomainError("bounds need a positive noise level");
  const EnergyIntegrals e = energy_integrals(s.pulses.at(i));
  if (e.e3 != 0.0) throw ConfigError("per-link bound is defined only for E3 = 0 pulses");
  const double alpha = attenuation(s.receiver, s.leds[i]);
  if (!(alpha > 0.0)) throw DomainError("LED " + std::to_string(i) + " has no line of sight");
  const double rp2 = s.receiver.responsivity * s.receiver.responsivity;
  LinkBound b;
  b.var_alpha = s.noise.psd / (rp2 * e.e2);
  b.var_tau = s.noise.psd / (rp2 * alpha * alpha * e.e1);
  return b;
}

}  // namespace qsvlp
