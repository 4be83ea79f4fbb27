#pragma once

#include "qsvlp/common.hpp"
#include "qsvlp/scenario.hpp"
#include "qsvlp/signal.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qsvlp {

/// Everything the receiver knows in advance: the constellation, its own
/// orientation and photodetector, the pulses, and the noise level. The
/// position stored in `receiver` is ignored.
struct ReceiverKnowledge {
  std::vector<LedTransmitter> leds;
  VlcReceiver receiver;
  std::vector<PulseSpec> pulses;
  double psd = 0.0;
  Room room;
  Mode mode = Mode::ThreeD;
  double known_height = 0.0;  // used in two_d mode

  /// Noise level used to weight the fusion model. A noiseless scenario
  /// (psd == 0) weights with a unit level and drops the log-determinant,
  /// which leaves weighted least squares with its zero-residual optimum.
  double weighting_psd() const { return psd > 0.0 ? psd : 1.0; }
};

ReceiverKnowledge receiver_knowledge(const Scenario& s);

struct ReceivedSignalSet {
  std::vector<SampledSignal> signals;  // one per LED
  ReceiverKnowledge meta;
};

struct EstimateDiagnostics {
  int evaluations = 0;
  int restarts = 0;
  bool converged = false;
  /// Largest distance between the best optimum and any other local optimum
  /// whose log-likelihood is within one nat of it.
  double restart_disagreement = 0.0;
  bool multimodal = false;
  std::vector<std::string> warnings;
};

struct PositionEstimate {
  Vec3 position = Vec3::Zero();
  std::optional<double> offset;  // direct estimator only
  double objective_value = 0.0;
  EstimateDiagnostics diagnostics;
};

// ---------------------------------------------------------------- direct

/// sum_i alpha_i C_i(tau_i) - (R_p / 2) sum_i alpha_i^2 E2_i for a candidate
/// (l_r, offset), with alpha_i and tau_i implied by the candidate and C_i the
/// correlation of r_i with the delayed pulse. Links without line of sight
/// contribute nothing. Returns -inf when a delay falls outside its window or
/// no link is usable.
double log_likelihood_objective(const ReceivedSignalSet& rs, const Vec3& position, double offset);

/// Joint ML estimate of position and clock offset: coarse grid over the
/// search region and offset range, then simplex refinement from the best
/// starts, then carrier-period hops in the offset around the best optimum.
PositionEstimate direct_ml(const ReceivedSignalSet& rs, const SearchConfig& search);

// -------------------------------------------------------------- two-step

struct ToaEstimate {
  double tau = 0.0;
  double peak = 0.0;  // correlator value at tau
  bool low_confidence = false;
};

/// Correlator TOA: best sample-resolution shift in [shift_min, shift_max]
/// (earliest on ties), three-point quadratic interpolation, then a
/// golden-section polish of the continuous correlator within one sample.
/// The estimate is flagged when sqrt(psd E2) / peak exceeds
/// `low_confidence_ratio`.
ToaEstimate estimate_toa(const SampledSignal& sig, const PulseSpec& p, double shift_min,
                         double shift_max, double psd = 0.0, double low_confidence_ratio = 0.2);

/// alpha_hat = C(tau_hat) / (R_p E2).
double estimate_rss(const SampledSignal& sig, const PulseSpec& p, double tau_hat,
                    double responsivity);

/// d_i = tau_i - tau_ref for every i != reference.
Eigen::VectorXd form_tdoa(std::span<const double> tau_hat, std::size_t reference = 0);

struct FirstStepEstimates {
  Eigen::VectorXd tau_hat;
  Eigen::VectorXd alpha_hat;
  Eigen::VectorXd d_hat;
  Eigen::VectorXd correlator_peaks;
  std::vector<bool> low_confidence;
  std::size_t reference = 0;
};

FirstStepEstimates first_step(const ReceivedSignalSet& rs, const SearchConfig& search);

/// High-SNR Gaussian model of the first-step outputs at a candidate position.
struct FusionModel {
  Eigen::MatrixXd sigma_d;      // TDOA covariance, s^2
  Eigen::VectorXd sigma_alpha;  // diagonal of the RSS covariance
  Eigen::VectorXd mu;           // [d; alpha] at the candidate
  Eigen::VectorXd nu;           // [d_hat; alpha_hat]; empty unless supplied
};

/// Throws DomainError if a candidate link has no line of sight and
/// ConfigError if any pulse has E3 != 0.
FusionModel fusion_covariances(const Vec3& position, const ReceiverKnowledge& meta,
                               std::size_t reference = 0);

/// log|Sigma_d| + (nu - mu)^T Sigma^-1 (nu - mu); +inf where a candidate link
/// has no line of sight. The log-determinant is omitted when psd == 0.
double two_step_objective(const FirstStepEstimates& fs, const ReceiverKnowledge& meta,
                          const Vec3& position);

/// Second step: multi-start minimization of two_step_objective.
PositionEstimate two_step_ml(const FirstStepEstimates& fs, const ReceiverKnowledge& meta,
                             const SearchConfig& search);

}  // namespace qsvlp
