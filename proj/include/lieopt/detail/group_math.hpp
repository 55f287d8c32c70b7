#pragma once

// Per-element closed forms shared by the batched operations, the optimizer
// models and IMU preintegration. Everything here works on fixed-size Eigen
// types and never allocates.

#include <cmath>
#include <limits>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace lieopt::detail {

template <typename S> using Vec3 = Eigen::Matrix<S, 3, 1>;
template <typename S> using Vec6 = Eigen::Matrix<S, 6, 1>;
template <typename S> using Mat3 = Eigen::Matrix<S, 3, 3>;
template <typename S> using Mat4 = Eigen::Matrix<S, 4, 4>;
template <typename S> using Mat6 = Eigen::Matrix<S, 6, 6>;
template <typename S> using Quat = Eigen::Quaternion<S>;

template <typename S>
constexpr S machine_eps() noexcept {
  return std::numeric_limits<S>::epsilon();
}

/// Below this angle the Log, V and Jacobian series replace the closed forms.
template <typename S>
inline S series_threshold() noexcept {
  static const S t = std::pow(machine_eps<S>(), S(0.25));
  return t;
}

template <typename S>
Mat3<S> hat(const Vec3<S>& v) {
  Mat3<S> m;
  // clang-format off
  m << S(0), -v.z(),  v.y(),
       v.z(),  S(0), -v.x(),
      -v.y(),  v.x(),  S(0);
  // clang-format on
  return m;
}

template <typename S>
Quat<S> quat_from_xyzw(const S* p) {
  return Quat<S>(p[3], p[0], p[1], p[2]);
}

template <typename S>
void quat_to_xyzw(const Quat<S>& q, S* p) {
  p[0] = q.x();
  p[1] = q.y();
  p[2] = q.z();
  p[3] = q.w();
}

// ---------------------------------------------------------------------------
// SO3

/// Closed-form branch: [x * sin(|x|/2)/|x|, cos(|x|/2)].
template <typename S>
Quat<S> so3_exp_closed(const Vec3<S>& x) {
  const S n = x.norm();
  const S half = n / S(2);
  const S gamma = std::sin(half) / n;
  return Quat<S>(std::cos(half), x.x() * gamma, x.y() * gamma, x.z() * gamma);
}

/// Fourth-order Taylor branch used when |x| <= eps.
template <typename S>
Quat<S> so3_exp_series(const Vec3<S>& x) {
  const S n2 = x.squaredNorm();
  const S n4 = n2 * n2;
  const S gamma = S(0.5) - n2 / S(48) + n4 / S(3840);
  const S w = S(1) - n2 / S(8) + n4 / S(384);
  return Quat<S>(w, x.x() * gamma, x.y() * gamma, x.z() * gamma);
}

template <typename S>
Quat<S> so3_exp(const Vec3<S>& x) {
  return x.norm() > machine_eps<S>() ? so3_exp_closed(x) : so3_exp_series(x);
}

/// Principal logarithm. q and -q give the same result (w >= 0 is used).
template <typename S>
Vec3<S> so3_log(const Quat<S>& q_in) {
  Quat<S> q = q_in;
  if (q.w() < S(0)) q.coeffs() = -q.coeffs();
  const Vec3<S> v = q.vec();
  const S n = v.norm();
  const S w = q.w();
  S factor;
  if (n < series_threshold<S>()) {
    // 2 atan(n/w) / n
    const S r2 = (n * n) / (w * w);
    factor = S(2) / w * (S(1) - r2 / S(3) + r2 * r2 / S(5));
  } else {
    factor = S(2) * std::atan2(n, w) / n;
  }
  return factor * v;
}

/// Coefficients of I + a*hat(phi) + b*hat(phi)^2 for the SO3 left Jacobian.
template <typename S>
void so3_jacobian_coefficients(S theta, S& a, S& b) {
  if (theta < series_threshold<S>()) {
    const S t2 = theta * theta;
    a = S(0.5) - t2 / S(24) + t2 * t2 / S(720);
    b = S(1) / S(6) - t2 / S(120) + t2 * t2 / S(5040);
  } else {
    const S t2 = theta * theta;
    a = (S(1) - std::cos(theta)) / t2;
    b = (theta - std::sin(theta)) / (t2 * theta);
  }
}

/// Coefficient c of I - hat/2 + c*hat^2 for the inverse left Jacobian.
template <typename S>
S so3_inverse_jacobian_coefficient(S theta) {
  const S t2 = theta * theta;
  if (theta < series_threshold<S>()) {
    return S(1) / S(12) + t2 / S(720) + t2 * t2 / S(30240);
  }
  // 1 - cos written as 2 sin^2(theta/2) to avoid cancellation just above the threshold
  const S sh = std::sin(theta / S(2));
  return (S(1) - theta * std::sin(theta) / (S(4) * sh * sh)) / t2;
}

/// Left Jacobian, also the V matrix mapping rho to translation in SE3 Exp.
template <typename S>
Mat3<S> so3_left_jacobian(const Vec3<S>& phi) {
  S a, b;
  so3_jacobian_coefficients(phi.norm(), a, b);
  const Mat3<S> P = hat(phi);
  return Mat3<S>::Identity() + a * P + b * P * P;
}

template <typename S>
Mat3<S> so3_left_jacobian_inverse(const Vec3<S>& phi) {
  const S c = so3_inverse_jacobian_coefficient(phi.norm());
  const Mat3<S> P = hat(phi);
  return Mat3<S>::Identity() - S(0.5) * P + c * P * P;
}

template <typename S>
Mat3<S> so3_right_jacobian(const Vec3<S>& phi) {
  return so3_left_jacobian<S>(-phi);
}

template <typename S>
Mat3<S> so3_right_jacobian_inverse(const Vec3<S>& phi) {
  return so3_left_jacobian_inverse<S>(-phi);
}

// ---------------------------------------------------------------------------
// SE3, tangent ordered (rho, phi)

template <typename S>
void se3_exp(const Vec3<S>& rho, const Vec3<S>& phi, Vec3<S>& t, Quat<S>& q) {
  q = so3_exp(phi);
  t = so3_left_jacobian(phi) * rho;
}

template <typename S>
void se3_log(const Vec3<S>& t, const Quat<S>& q, Vec3<S>& rho, Vec3<S>& phi) {
  phi = so3_log(q);
  rho = so3_left_jacobian_inverse(phi) * t;
}

/// Off-diagonal block of the SE3 left Jacobian.
template <typename S>
Mat3<S> se3_q_block(const Vec3<S>& rho, const Vec3<S>& phi) {
  const S theta = phi.norm();
  const S t2 = theta * theta;
  S c1, c2, c3;
  // The closed forms lose about eps/theta^2, so the series runs further out here.
  if (theta < S(1e-2)) {
    const S t4 = t2 * t2;
    c1 = S(1) / S(6) - t2 / S(120) + t4 / S(5040);
    c2 = S(1) / S(24) - t2 / S(720) + t4 / S(40320);
    c3 = S(1) / S(120) - t2 / S(2520) + t4 / S(120960);
  } else {
    const S s = std::sin(theta), c = std::cos(theta);
    c1 = (theta - s) / (t2 * theta);
    c2 = (t2 + S(2) * c - S(2)) / (S(2) * t2 * t2);
    c3 = (S(2) * theta - S(3) * s + theta * c) / (S(2) * t2 * t2 * theta);
  }
  const Mat3<S> P = hat(phi);
  const Mat3<S> R = hat(rho);
  const Mat3<S> PR = P * R;
  const Mat3<S> PRP = PR * P;
  return S(0.5) * R + c1 * (PR + R * P + PRP) + c2 * (P * PR + R * P * P - S(3) * PRP) +
         c3 * (PRP * P + P * PRP);
}

template <typename S>
Mat6<S> se3_left_jacobian(const Vec6<S>& xi) {
  const Vec3<S> rho = xi.template head<3>();
  const Vec3<S> phi = xi.template tail<3>();
  Mat6<S> J = Mat6<S>::Zero();
  const Mat3<S> Jl = so3_left_jacobian(phi);
  J.template topLeftCorner<3, 3>() = Jl;
  J.template bottomRightCorner<3, 3>() = Jl;
  J.template topRightCorner<3, 3>() = se3_q_block(rho, phi);
  return J;
}

template <typename S>
Mat6<S> se3_left_jacobian_inverse(const Vec6<S>& xi) {
  const Vec3<S> rho = xi.template head<3>();
  const Vec3<S> phi = xi.template tail<3>();
  const Mat3<S> Ji = so3_left_jacobian_inverse(phi);
  Mat6<S> J = Mat6<S>::Zero();
  J.template topLeftCorner<3, 3>() = Ji;
  J.template bottomRightCorner<3, 3>() = Ji;
  J.template topRightCorner<3, 3>() = -Ji * se3_q_block(rho, phi) * Ji;
  return J;
}

/// Adjoint of (t, q) acting on (rho, phi) tangents.
template <typename S>
Mat6<S> se3_adjoint(const Vec3<S>& t, const Quat<S>& q) {
  const Mat3<S> R = q.toRotationMatrix();
  Mat6<S> A = Mat6<S>::Zero();
  A.template topLeftCorner<3, 3>() = R;
  A.template bottomRightCorner<3, 3>() = R;
  A.template topRightCorner<3, 3>() = hat(t) * R;
  return A;
}

// ---------------------------------------------------------------------------
// Sim3, tangent ordered (rho, phi, sigma)

/// Integral of u^k exp(sigma u) over [0, 1].
template <typename S>
S exp_moment(int k, S sigma) {
  if (std::abs(sigma) <= S(1)) {
    S sum = 0;
    S power = 1;  // sigma^m / m!
    for (int m = 0; m < 40; ++m) {
      const S term = power / S(k + m + 1);
      sum += term;
      if (std::abs(term) <= machine_eps<S>() * std::abs(sum)) break;
      power *= sigma / S(m + 1);
    }
    return sum;
  }
  const S e = std::exp(sigma);
  S value = std::expm1(sigma) / sigma;
  for (int j = 1; j <= k; ++j) value = (e - S(j) * value) / sigma;
  return value;
}

/// W = c*I + a*hat(phi) + b*hat(phi)^2 maps rho to the Sim3 translation.
template <typename S>
Mat3<S> sim3_w_matrix(const Vec3<S>& phi, S sigma) {
  const S theta = phi.norm();
  const S t2 = theta * theta;
  const S c = sigma == S(0) ? S(1) : std::expm1(sigma) / sigma;
  S a, b;
  if (theta < series_threshold<S>()) {
    a = exp_moment(1, sigma) - t2 * exp_moment(3, sigma) / S(6) + t2 * t2 * exp_moment(5, sigma) / S(120);
    b = exp_moment(2, sigma) / S(2) - t2 * exp_moment(4, sigma) / S(24) +
        t2 * t2 * exp_moment(6, sigma) / S(720);
  } else {
    const S es = std::exp(sigma);
    const S ec = es * std::cos(theta), esn = es * std::sin(theta);
    const S denom = sigma * sigma + t2;
    const S cos_part = (sigma * (ec - S(1)) + theta * esn) / denom;
    const S sin_part = (sigma * esn - theta * (ec - S(1))) / denom;
    a = sin_part / theta;
    b = (c - cos_part) / t2;
  }
  const Mat3<S> P = hat(phi);
  return c * Mat3<S>::Identity() + a * P + b * P * P;
}

}  // namespace lieopt::detail
