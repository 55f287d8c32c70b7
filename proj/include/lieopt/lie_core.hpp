#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "lieopt/lie_batch.hpp"

namespace lieopt {

/// Elementwise Exp of an algebra batch. so3 switches to a Taylor series at
/// |x| <= machine epsilon; the other kinds compose that with their
/// translation and scale sub-maps.
template <typename S>
BasicLieBatch<S> exp_map(const BasicLieBatch<S>& x);

/// Principal logarithm; rotation parts have norm <= pi. Quaternions are
/// taken with w >= 0 so q and -q share a tangent.
template <typename S>
BasicLieBatch<S> log_map(const BasicLieBatch<S>& g);

/// Group product a * b with trailing-dimension broadcasting.
template <typename S>
BasicLieBatch<S> compose(const BasicLieBatch<S>& a, const BasicLieBatch<S>& b);

template <typename S>
BasicLieBatch<S> inverse(const BasicLieBatch<S>& g);

/// Action on points: rotation, rigid, similarity or rotation+scale.
template <typename S>
BasicPointBatch<S> act(const BasicLieBatch<S>& g, const BasicPointBatch<S>& p);

/// 3x3 for SO3/RxSO3, 4x4 homogeneous for SE3/Sim3.
template <typename S>
std::vector<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>> to_matrix(const BasicLieBatch<S>& g);

/// Identity element for group kinds, zero vector for algebra kinds.
template <typename S = double>
BasicLieBatch<S> identity(Kind kind, const Shape& shape = {});

/// I.i.d. normal entries scaled by sigma, deterministic for a given seed.
/// A group kind draws its algebra tangent.
template <typename S = double>
BasicLieBatch<S> random_tangent(Kind kind, const Shape& shape, double sigma, std::uint64_t seed);

/// exp_map(random_tangent(algebra_of(kind), ...)).
template <typename S = double>
BasicLieBatch<S> random_group(Kind kind, const Shape& shape, double sigma, std::uint64_t seed);

/// Throws CorruptElementError/DomainError if any item of a group batch is
/// unusable (quaternion norm off by more than 1e-3, non-positive scale,
/// non-finite entries).
template <typename S>
void check_group(const BasicLieBatch<S>& g);

Eigen::Matrix3d hat(const Eigen::Vector3d& x);

/// Jr(phi) = I - (1-cos)/theta^2 hat + (theta-sin)/theta^3 hat^2.
Eigen::Matrix3d right_jacobian_so3(const Eigen::Vector3d& phi);

}  // namespace lieopt
