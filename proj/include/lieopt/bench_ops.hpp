#pragma once

#include <vector>

#include <Eigen/Core>

#include "lieopt/lie_batch.hpp"
#include "lieopt/manifold_diff.hpp"

namespace lieopt::bench {

/// f1(x) = Log(Exp(x)) over an so3 batch.
template <typename S>
BasicLieBatch<S> f1(const BasicLieBatch<S>& x);

/// f2(x) = Log(Exp(x) * Exp(y)).
template <typename S>
BasicLieBatch<S> f2(const BasicLieBatch<S>& x, const BasicLieBatch<S>& y);

/// f3(x) = Exp(x) * p.
template <typename S>
BasicPointBatch<S> f3(const BasicLieBatch<S>& x, const BasicPointBatch<S>& p);

/// Analytic d f / d x per item, x treated as a plain 3-vector.
std::vector<Eigen::Matrix3d> f1_jacobian(const LieBatch& x);
std::vector<Eigen::Matrix3d> f2_jacobian(const LieBatch& x, const LieBatch& y);
std::vector<Eigen::Matrix3d> f3_jacobian(const LieBatch& x, const PointBatch& p);

/// The operators as residual functions of a single vector parameter holding
/// the stacked x, for the numeric Jacobian routines. The returned functions
/// keep copies of y and p.
ResidualFunction f1_function();
ResidualFunction f2_function(const LieBatch& y);
ResidualFunction f3_function(const PointBatch& p);

}  // namespace lieopt::bench
