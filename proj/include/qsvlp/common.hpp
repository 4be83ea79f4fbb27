#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace qsvlp {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Speed of light in vacuum, m/s (exact SI value).
inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Bad input geometry or an operation evaluated outside its domain
/// (coincident positions, an invalid line-of-sight link, a shift outside
/// the observation window).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent or incomplete configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimator could not produce any finite candidate.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Fisher information matrix too ill-conditioned to invert.
class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(const std::string& what, Eigen::VectorXd null_direction,
                     double condition_number)
      : std::runtime_error(what),
        null_direction_(std::move(null_direction)),
        condition_number_(condition_number) {}

  /// Unit vector (in parameter coordinates) spanning the weakest direction.
  const Eigen::VectorXd& null_direction() const { return null_direction_; }
  double condition_number() const { return condition_number_; }

 private:
  Eigen::VectorXd null_direction_;
  double condition_number_;
};

}  // namespace qsvlp
