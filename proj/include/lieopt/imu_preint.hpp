#pragma once

#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace lieopt::imu {

using Matrix9 = Eigen::Matrix<double, 9, 9>;

/// Continuous-time white-noise densities.
struct ImuNoise {
  double gyro = 0.0;   // rad/s/sqrt(Hz)
  double accel = 0.0;  // m/s^2/sqrt(Hz)
};

/// Preintegrated motion since the start of the window, with the covariance
/// of the error state ordered (dphi, dv, dp).
struct PreintState {
  double dt = 0.0;
  Eigen::Quaterniond dR = Eigen::Quaterniond::Identity();
  Eigen::Vector3d dv = Eigen::Vector3d::Zero();
  Eigen::Vector3d dp = Eigen::Vector3d::Zero();
  Matrix9 cov = Matrix9::Zero();
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();
};

struct NavState {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  Eigen::Quaterniond R = Eigen::Quaterniond::Identity();
};

inline const Eigen::Vector3d kDefaultGravity(0.0, 0.0, -9.81);

/// One left-point Euler step on the manifold. Noise densities enter the
/// discrete covariance as sigma^2 / dt. Throws DomainError for dt <= 0 or
/// non-finite measurements.
PreintState integrate_step(const PreintState& s, const Eigen::Vector3d& gyro, const Eigen::Vector3d& accel,
                           double dt, const ImuNoise& noise);

/// Left fold of integrate_step. Throws ShapeError on length mismatch.
PreintState integrate_batch(const PreintState& s, std::span<const Eigen::Vector3d> gyro,
                            std::span<const Eigen::Vector3d> accel, std::span<const double> dt,
                            const ImuNoise& noise);

/// Applies the preintegrated deltas to a start state under gravity.
NavState predict(const NavState& start, const PreintState& s, const Eigen::Vector3d& gravity = kDefaultGravity);

}  // namespace lieopt::imu
