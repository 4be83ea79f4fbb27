#pragma once

#include "qsvlp/common.hpp"
#include "qsvlp/scenario.hpp"

#include <span>
#include <string>
#include <vector>

namespace qsvlp {

/// Fisher information for phi = [x, y, z, offset].
struct FimResult {
  Mat4 fim = Mat4::Zero();
  std::vector<Mat4> link_contributions;  // one per LED; zero for excluded links
  std::vector<bool> link_used;
  std::vector<std::string> warnings;
};

/// Position (and offset) bounds obtained from an inverted FIM.
struct CrlbResult {
  Mat3 position_cov_bound = Mat3::Zero();  // m^2; frozen coordinates are zero
  double mse_bound_trace = 0.0;            // m^2
  double offset_var_bound = 0.0;           // s^2
  Vec3 per_coordinate = Vec3::Zero();      // m^2
};

/// FIM for an explicit constellation. Links without line of sight are
/// excluded and reported in `warnings`. Throws DomainError when no link is
/// usable or psd <= 0.
FimResult fim(std::span<const LedTransmitter> leds, const VlcReceiver& rx,
              std::span<const PulseSpec> pulses, double psd);

/// FIM at the scenario's receiver truth.
FimResult fim(const Scenario& s);

/// Indices of the unknown position coordinates for a mode.
std::vector<int> free_coordinates(Mode mode);

/// Inverse of a symmetric information matrix. Conditioning is judged after
/// scaling to unit diagonal, so mixed units do not matter; beyond
/// `max_condition` a RankDeficientError names the weakest direction.
Eigen::MatrixXd invert_information(const Eigen::MatrixXd& info, double max_condition = 1e14);

/// Numerical rank after unit-diagonal scaling.
int information_rank(const Eigen::MatrixXd& info, double max_condition = 1e14);

/// Inverts the full FIM restricted to the free coordinates plus offset.
CrlbResult crlb_full(const FimResult& f, Mode mode = Mode::ThreeD);

/// sqrt(trace position bound) at the scenario truth, in the scenario's mode.
double sqrt_crlb(const Scenario& s);

/// 3x3 reduced information from the closed-form double sum over links. Its
/// inverse trace is the position MSE bound with the offset unknown.
Mat3 fim_qs(std::span<const LedTransmitter> leds, const VlcReceiver& rx,
            std::span<const PulseSpec> pulses, double psd);
Mat3 fim_qs(const Scenario& s);

/// (J_A - J_b J_b^T / J_c)^-1 over the free coordinates. Throws DomainError
/// when J_c == 0.
Eigen::MatrixXd schur_position_block(const FimResult& f, Mode mode = Mode::ThreeD);

struct SyncEquivalence {
  bool holds = false;
  /// sum_i alpha_i^2 E1_i (l_r - l_t^i)_k / |l_r - l_t^i|, divided by
  /// sum_i alpha_i^2 E1_i so the entries are dimensionless in [-1, 1].
  Vec3 residuals = Vec3::Zero();
};

/// Whether knowing the offset would not improve the bound. Only the free
/// coordinates of `mode` participate in `holds`. Requires E3 = 0 on every
/// link (ConfigError otherwise).
SyncEquivalence sync_equivalence_check(const Scenario& s, double tol, Mode mode = Mode::ThreeD);

struct LinkBound {
  double var_alpha = 0.0;  // dimensionless^2
  double var_tau = 0.0;    // s^2
};

/// Single-link bounds for estimating (alpha_i, tau_i) from r_i alone.
LinkBound crlb_link(const Scenario& s, std::size_t i);

}  // namespace qsvlp
