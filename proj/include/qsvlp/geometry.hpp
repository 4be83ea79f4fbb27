#pragma once

#include "qsvlp/common.hpp"

#include <span>
#include <string>
#include <vector>

namespace qsvlp {

struct LedTransmitter {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3(0.0, 0.0, -1.0);
  double lambertian_order = 1.0;

  /// Human-readable invariant violations; empty when valid.
  std::vector<std::string> violations() const;
};

struct VlcReceiver {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3(0.0, 0.0, 1.0);
  double responsivity = 0.4;     // A/W
  double detector_area = 1e-4;   // m^2

  std::vector<std::string> violations() const;
};

/// Clock offset between the (mutually synchronized) transmitters and the
/// receiver. May be negative.
struct ClockOffset {
  double delta = 0.0;  // s
};

/// Line-of-sight quantities of one transmitter/receiver pair.
struct ChannelGeometry {
  double distance = 0.0;
  double cos_irradiation = 0.0;  // angle at the LED
  double cos_incidence = 0.0;    // angle at the photodetector
  double gamma = 0.0;            // (m + 1) A_r / (2 pi)

  /// Lambertian model only applies to front-facing links.
  bool valid() const { return cos_irradiation > 0.0 && cos_incidence > 0.0; }
};

/// Throws DomainError for coincident positions.
ChannelGeometry channel_geometry(const VlcReceiver& rx, const LedTransmitter& tx);

bool link_valid(const VlcReceiver& rx, const LedTransmitter& tx);

/// Lambertian attenuation factor. Returns 0 for links without line of sight.
double attenuation(const VlcReceiver& rx, const LedTransmitter& tx);

/// Time of arrival including the clock offset.
double toa(const VlcReceiver& rx, const LedTransmitter& tx, ClockOffset offset = {});

/// Propagation delay only (distance / c).
double propagation_delay(const VlcReceiver& rx, const LedTransmitter& tx);

/// TDOA of every transmitter relative to `reference` (N-1 entries, the
/// reference skipped). Independent of the clock offset.
Eigen::VectorXd tdoa_vector(const VlcReceiver& rx, std::span<const LedTransmitter> txs,
                            ClockOffset offset = {}, std::size_t reference = 0);

/// d tau / d l_r. Always has norm 1/c.
Vec3 toa_gradient(const VlcReceiver& rx, const LedTransmitter& tx);

/// d alpha / d l_r with both normals held fixed. Throws DomainError for an
/// invalid link.
Vec3 attenuation_gradient(const VlcReceiver& rx, const LedTransmitter& tx);

/// Copy of `rx` moved to `position`.
VlcReceiver moved(const VlcReceiver& rx, const Vec3& position);

}  // namespace qsvlp
