#include "lieopt/imu_preint.hpp"

#include "lieopt/detail/group_math.hpp"
#include "lieopt/error.hpp"

namespace lieopt::imu {

using Eigen::Matrix3d;
using Eigen::Vector3d;

PreintState integrate_step(const PreintState& s, const Vector3d& gyro, const Vector3d& accel, double dt,
                           const ImuNoise& noise) {
  if (!(dt > 0.0)) throw DomainError("integrate_step: dt must be positive");
  if (!gyro.allFinite() || !accel.allFinite()) throw DomainError("integrate_step: non-finite measurement");

  const Vector3d w = gyro - s.gyro_bias;
  const Vector3d a = accel - s.accel_bias;
  const Vector3d phi = w * dt;
  const Matrix3d R = s.dR.toRotationMatrix();
  const Vector3d Ra = R * a;
  const Eigen::Quaterniond step = detail::so3_exp(phi);
  const double dt2 = dt * dt;

  PreintState out = s;
  out.dp = s.dp + s.dv * dt + 0.5 * Ra * dt2;
  out.dv = s.dv + Ra * dt;
  out.dR = (s.dR * step).normalized();
  out.dt = s.dt + dt;

  const Matrix3d a_hat = detail::hat<double>(a);
  Matrix9 A = Matrix9::Identity();
  A.block<3, 3>(0, 0) = step.toRotationMatrix().transpose();
  A.block<3, 3>(3, 0) = -R * a_hat * dt;
  A.block<3, 3>(6, 0) = -0.5 * R * a_hat * dt2;
  A.block<3, 3>(6, 3) = Matrix3d::Identity() * dt;

  Eigen::Matrix<double, 9, 3> Bg = Eigen::Matrix<double, 9, 3>::Zero();
  Bg.topRows<3>() = detail::so3_right_jacobian<double>(phi) * dt;
  Eigen::Matrix<double, 9, 3> Ba = Eigen::Matrix<double, 9, 3>::Zero();
  Ba.middleRows<3>(3) = R * dt;
  Ba.bottomRows<3>() = 0.5 * R * dt2;

  const double qg = noise.gyro * noise.gyro / dt;
  const double qa = noise.accel * noise.accel / dt;
  Matrix9 cov = A * s.cov * A.transpose() + qg * Bg * Bg.transpose() + qa * Ba * Ba.transpose();
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

PreintState integrate_batch(const PreintState& s, std::span<const Vector3d> gyro, std::span<const Vector3d> accel,
                            std::span<const double> dt, const ImuNoise& noise) {
  if (gyro.size() != accel.size() || gyro.size() != dt.size()) {
    throw ShapeError("integrate_batch: gyro, accel and dt series differ in length");
  }
  PreintState out = s;
  for (std::size_t k = 0; k < gyro.size(); ++k) out = integrate_step(out, gyro[k], accel[k], dt[k], noise);
  return out;
}

NavState predict(const NavState& start, const PreintState& s, const Vector3d& gravity) {
  NavState out;
  out.R = (start.R * s.dR).normalized();
  out.v = start.v + gravity * s.dt + start.R * s.dv;
  out.p = start.p + start.v * s.dt + 0.5 * gravity * s.dt * s.dt + start.R * s.dp;
  return out;
}

}  // namespace lieopt::imu
