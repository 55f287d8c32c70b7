#pragma once

#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "lieopt/lie_batch.hpp"

namespace lieopt {

/// One optimization variable: a batch of group elements or a real vector.
using Param = std::variant<LieBatch, Eigen::VectorXd>;

/// Ordered parameters with a flat tangent space. A group parameter of B
/// items contributes B * tangent_size(kind) coordinates, item by item; a
/// vector contributes its length.
class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(std::vector<Param> params);

  void add(Param p);

  std::size_t size() const noexcept { return params_.size(); }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  Param& operator[](std::size_t i) { return params_[i]; }

  const LieBatch& group(std::size_t i) const { return std::get<LieBatch>(params_[i]); }
  const Eigen::VectorXd& vector(std::size_t i) const { return std::get<Eigen::VectorXd>(params_[i]); }

  Eigen::Index tangent_dim() const noexcept;
  Eigen::Index tangent_dim(std::size_t i) const;
  Eigen::Index offset(std::size_t i) const;

 private:
  std::vector<Param> params_;
};

/// Vectors add delta; group items move by left perturbation Exp(delta) * g.
ParamSet retract(const ParamSet& p, const Eigen::Ref<const Eigen::VectorXd>& delta);

using ResidualFunction = std::function<Eigen::VectorXd(const ParamSet&)>;
using JacobianFunction = std::function<Eigen::MatrixXd(const ParamSet&)>;

/// A residual function with an optional analytic Jacobian in the same
/// left-perturbation tangent coordinates as retract().
struct DifferentiableFunction {
  ResidualFunction value;
  JacobianFunction jacobian;
};

struct JacobianOptions {
  /// Compare an analytic Jacobian against central differences.
  bool validate = false;
  double tolerance = 1e-5;
};

/// Probe step for tangent coordinate k: cbrt(eps) * max(1, |value|), where
/// value is the vector entry (group coordinates sit at the origin of their
/// local chart, so they use 1).
double probe_step(const ParamSet& p, Eigen::Index k);

/// Central differences through retract(), column by column.
Eigen::MatrixXd numeric_jacobian(const ResidualFunction& f, const ParamSet& p);

/// Uses the analytic Jacobian when present, otherwise numeric_jacobian().
/// With validation enabled a mismatch above the tolerance throws
/// ContractViolation.
Eigen::MatrixXd jacobian_dense(const DifferentiableFunction& f, const ParamSet& p,
                               const JacobianOptions& options = {});

/// max |a - b| / max(1, max |b|).
double jacobian_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct BlockDiagonalJacobian {
  Eigen::Index block_rows = 0;
  Eigen::Index block_cols = 0;
  std::vector<Eigen::MatrixXd> blocks;

  Eigen::MatrixXd to_dense() const;
};

struct BatchedJacobianOptions {
  /// Probe the first and last item and throw ContractViolation if any other
  /// item's residual moves.
  bool validate = false;
  /// Item count when p holds only vectors; 0 infers it from the group batches.
  std::size_t items = 0;
};

/// Number of independent items shared by every parameter of p. Without group
/// batches the count is `items`, or 1 when that is 0.
std::size_t batch_count(const ParamSet& p, std::size_t items = 0);

/// Block-diagonal Jacobian of f for item-independent residuals.
///
/// f sees the whole batch and returns B stacked residuals of equal size. All
/// items are probed along the same local coordinate at once, so the cost is
/// 2 * (per-item tangent size) calls to f regardless of B. Columns run in
/// parallel; f must be safe to call concurrently.
BlockDiagonalJacobian jacobian_batched(const ResidualFunction& f, const ParamSet& p,
                                       const BatchedJacobianOptions& options = {});

/// Global column of coordinate `local` of item `item` in the flat tangent.
Eigen::Index batched_column(const ParamSet& p, std::size_t item, Eigen::Index local, std::size_t items = 0);

}  // namespace lieopt
