#include "lieopt/optim/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lieopt/error.hpp"

namespace lieopt::optim {

double squared_cost(const Eigen::VectorXd& residual, const Eigen::MatrixXd& weight) {
  return residual.dot(weight * residual);
}

std::vector<ResidualBlock> FunctionModel::blocks(const ParamSet& theta, bool with_jacobian) const {
  Eigen::VectorXd r = predict(theta);
  if (target.size() != 0) {
    if (target.size() != r.size()) throw ShapeError("FunctionModel: target size does not match prediction");
    r -= target;
  }
  if (residual_dim <= 0 || r.size() % residual_dim != 0) {
    throw ShapeError("FunctionModel: prediction size is not a multiple of the residual dimension");
  }
  const Eigen::Index d = residual_dim;
  const auto items = static_cast<std::size_t>(r.size() / d);
  if (weights.size() > 1 && weights.size() != items) {
    throw ShapeError("FunctionModel: expected one weight per item");
  }

  std::vector<ResidualBlock> out(items);
  for (std::size_t i = 0; i < items; ++i) {
    auto& blk = out[i];
    blk.residual = r.segment(static_cast<Eigen::Index>(i) * d, d);
    blk.weight = weights.empty() ? Eigen::MatrixXd::Identity(d, d) : weights[weights.size() == 1 ? 0 : i];
  }
  if (!with_jacobian) return out;

  if (jacobian || mode == JacobianMode::Dense) {
    const Eigen::MatrixXd J = jacobian ? jacobian(theta) : numeric_jacobian(predict, theta);
    if (J.rows() != r.size() || J.cols() != theta.tangent_dim()) {
      throw ShapeError("FunctionModel: Jacobian has the wrong size");
    }
    for (std::size_t i = 0; i < items; ++i) out[i].jacobian = J.middleRows(static_cast<Eigen::Index>(i) * d, d);
  } else {
    BatchedJacobianOptions options;
    options.items = items;
    const BlockDiagonalJacobian J = jacobian_batched(predict, theta, options);
    if (J.blocks.size() != items || J.block_rows != d) {
      throw ShapeError("FunctionModel: batched Jacobian does not match the residual items");
    }
    for (std::size_t i = 0; i < items; ++i) {
      out[i].jacobian = J.blocks[i];
      out[i].columns.resize(static_cast<std::size_t>(J.block_cols));
      for (Eigen::Index c = 0; c < J.block_cols; ++c) {
        out[i].columns[static_cast<std::size_t>(c)] = batched_column(theta, i, c, items);
      }
    }
  }
  return out;
}

Evaluation evaluate(const Model& model, const ParamSet& theta, const Kernel& kernel, bool with_jacobian) {
  Evaluation ev;
  ev.blocks = model.blocks(theta, with_jacobian);
  for (std::size_t i = 0; i < ev.blocks.size(); ++i) {
    auto& blk = ev.blocks[i];
    if (!blk.residual.allFinite()) throw EvaluationError(i, "non-finite residual");
    blk.cost = squared_cost(blk.residual, blk.weight);
    ev.loss += apply_kernel(kernel, std::max(blk.cost, 0.0)).rho;
  }
  return ev;
}

ResidualBlock correct_fast_triggs(const ResidualBlock& block, const Kernel& kernel) {
  const double rho_prime = apply_kernel(kernel, std::max(block.cost, 0.0)).derivative;
  if (!(rho_prime > 0.0)) throw DomainError("corrector: kernel derivative must be positive");
  if (rho_prime == 1.0) return block;
  const double scale = std::sqrt(rho_prime);
  ResidualBlock out = block;
  out.residual *= scale;
  out.jacobian *= scale;
  out.cost = squared_cost(out.residual, out.weight);
  return out;
}

}  // namespace lieopt::optim
