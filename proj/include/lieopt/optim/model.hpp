#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "lieopt/manifold_diff.hpp"
#include "lieopt/optim/kernel.hpp"

namespace lieopt::optim {

/// Linearization of one residual item.
struct ResidualBlock {
  Eigen::VectorXd residual;  // f(theta, x_i) - y_i
  /// d x n, or d x columns.size() when `columns` lists the global tangent
  /// columns the block touches.
  Eigen::MatrixXd jacobian;
  std::vector<Eigen::Index> columns;
  Eigen::MatrixXd weight;  // d x d information
  double cost = 0.0;       // residual^T weight residual
};

double squared_cost(const Eigen::VectorXd& residual, const Eigen::MatrixXd& weight);

/// A least-squares problem over a ParamSet.
class Model {
 public:
  virtual ~Model() = default;

  /// Residual blocks at theta. Jacobians are filled only when requested.
  virtual std::vector<ResidualBlock> blocks(const ParamSet& theta, bool with_jacobian) const = 0;
};

enum class JacobianMode { Dense, Batched };

/// Model built from a stacked prediction function f(theta) returning one
/// d-vector per item. Jacobians come from `jacobian` when set, otherwise from
/// central differences (dense, or block-diagonal in Batched mode where item
/// i's residual may only depend on item i's parameters).
struct FunctionModel final : Model {
  ResidualFunction predict;
  Eigen::VectorXd target;  // stacked y_i; empty means zero
  Eigen::Index residual_dim = 1;
  /// Empty: identity. One entry: shared by all items. Otherwise one per item.
  std::vector<Eigen::MatrixXd> weights;
  JacobianFunction jacobian;
  JacobianMode mode = JacobianMode::Dense;

  std::vector<ResidualBlock> blocks(const ParamSet& theta, bool with_jacobian) const override;
};

struct Evaluation {
  std::vector<ResidualBlock> blocks;
  double loss = 0.0;  // sum of rho(c_i)
};

/// Residuals, costs and the kernelized loss. Throws EvaluationError naming
/// the first item whose residual is not finite.
Evaluation evaluate(const Model& model, const ParamSet& theta, const Kernel& kernel, bool with_jacobian = true);

/// Scales residual and Jacobian by sqrt(rho'(c)) and recomputes the cost.
ResidualBlock correct_fast_triggs(const ResidualBlock& block, const Kernel& kernel);

}  // namespace lieopt::optim
