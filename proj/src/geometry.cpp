#include "qsvlp/geometry.hpp"

#include <cmath>
#include <numbers>

namespace qsvlp {

namespace {

constexpr double kUnitTolerance = 1e-12;

std::string vec_str(const Vec3& v) {
  return "[" + std::to_string(v.x()) + ", " + std::to_string(v.y()) + ", " +
         std::to_string(v.z()) + "]";
}

}  // namespace

std::vector<std::string> LedTransmitter::violations() const {
  std::vector<std::string> out;
  if (!position.allFinite()) out.push_back("position not finite");
  if (!normal.allFinite() || std::abs(normal.norm() - 1.0) > kUnitTolerance)
    out.push_back("normal not unit: " + vec_str(normal));
  if (!(lambertian_order >= 1.0)) out.push_back("lambertian_order must be >= 1");
  return out;
}

std::vector<std::string> VlcReceiver::violations() const {
  std::vector<std::string> out;
  if (!position.allFinite()) out.push_back("position not finite");
  if (!normal.allFinite() || std::abs(normal.norm() - 1.0) > kUnitTolerance)
    out.push_back("normal not unit: " + vec_str(normal));
  if (!(responsivity > 0.0)) out.push_back("responsivity must be > 0");
  if (!(detector_area > 0.0)) out.push_back("detector_area must be > 0");
  return out;
}

ChannelGeometry channel_geometry(const VlcReceiver& rx, const LedTransmitter& tx) {
  const Vec3 w = rx.position - tx.position;
  const double d = w.norm();
  if (!(d > 0.0)) throw DomainError("receiver and transmitter positions coincide");
  ChannelGeometry g;
  g.distance = d;
  g.cos_irradiation = w.dot(tx.normal) / d;
  g.cos_incidence = -w.dot(rx.normal) / d;
  g.gamma = (tx.lambertian_order + 1.0) * rx.detector_area / (2.0 * std::numbers::pi);
  return g;
}

bool link_valid(const VlcReceiver& rx, const LedTransmitter& tx) {
  return channel_geometry(rx, tx).valid();
}

double attenuation(const VlcReceiver& rx, const LedTransmitter& tx) {
  const ChannelGeometry g = channel_geometry(rx, tx);
  if (!g.valid()) return 0.0;
  return g.gamma * std::pow(g.cos_irradiation, tx.lambertian_order) * g.cos_incidence /
         (g.distance * g.distance);
}

double propagation_delay(const VlcReceiver& rx, const LedTransmitter& tx) {
  const double d = (rx.position - tx.position).norm();
  if (!(d > 0.0)) throw DomainError("receiver and transmitter positions coincide");
  return d / kSpeedOfLight;
}

double toa(const VlcReceiver& rx, const LedTransmitter& tx, ClockOffset offset) {
  return propagation_delay(rx, tx) + offset.delta;
}

Eigen::VectorXd tdoa_vector(const VlcReceiver& rx, std::span<const LedTransmitter> txs,
                            ClockOffset /*offset*/, std::size_t reference) {
  if (txs.size() < 2) throw ConfigError("TDOA needs at least two transmitters");
  if (reference >= txs.size()) throw ConfigError("reference transmitter index out of range");
  // The common offset cancels; differencing distances keeps that exact.
  const double ref = (rx.position - txs[reference].position).norm();
  Eigen::VectorXd d(static_cast<Eigen::Index>(txs.size() - 1));
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < txs.size(); ++i) {
    if (i == reference) continue;
    const double di = (rx.position - txs[i].position).norm();
    if (!(di > 0.0) || !(ref > 0.0))
      throw DomainError("receiver and transmitter positions coincide");
    d[k++] = (di - ref) / kSpeedOfLight;
  }
  return d;
}

Vec3 toa_gradient(const VlcReceiver& rx, const LedTransmitter& tx) {
  const Vec3 w = rx.position - tx.position;
  const double d = w.norm();
  if (!(d > 0.0)) throw DomainError("receiver and transmitter positions coincide");
  return w / (kSpeedOfLight * d);
}

Vec3 attenuation_gradient(const VlcReceiver& rx, const LedTransmitter& tx) {
  const ChannelGeometry g = channel_geometry(rx, tx);
  if (!g.valid()) throw DomainError("attenuation gradient requested for a link without line of sight");
  // alpha = gamma u^m v / d^(m+3) with u = w.n_t, v = -w.n_r, w = l_r - l_t.
  const Vec3 w = rx.position - tx.position;
  const double m = tx.lambertian_order;
  const double d = g.distance;
  const double u = w.dot(tx.normal);
  const double v = -w.dot(rx.normal);
  const double alpha = g.gamma * std::pow(u, m) * v / std::pow(d, m + 3.0);
  return alpha * (m * tx.normal / u - rx.normal / v - (m + 3.0) * w / (d * d));
}

VlcReceiver moved(const VlcReceiver& rx, const Vec3& position) {
  VlcReceiver out = rx;
  out.position = position;
  return out;
}

}  // namespace qsvlp
