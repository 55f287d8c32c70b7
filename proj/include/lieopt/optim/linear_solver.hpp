#pragma once

#include <span>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "lieopt/optim/model.hpp"

namespace lieopt::optim {

/// Damped normal equations A delta = b with A = H + lambda * D, where
/// H = sum J^T W J, D = diag(H) floored at 1e-12 and b = -sum J^T W R.
struct NormalEquations {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd damping;  // D
  double lambda = 0.0;
};

struct SparseNormalEquations {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  Eigen::VectorXd damping;
  double lambda = 0.0;
};

inline constexpr double kDampingFloor = 1e-12;

NormalEquations build_normal_equations(std::span<const ResidualBlock> blocks, double lambda, Eigen::Index n);
SparseNormalEquations build_sparse_normal_equations(std::span<const ResidualBlock> blocks, double lambda,
                                                    Eigen::Index n);

/// Rebuilds A for a new lambda without touching the blocks.
void redamp(NormalEquations& eqs, double lambda);
void redamp(SparseNormalEquations& eqs, double lambda);

/// LLT with up to three jitter escalations (1e-12 * trace / n, x10 each).
Eigen::VectorXd solve_cholesky(const NormalEquations& eqs);
Eigen::VectorXd solve_cholesky(const SparseNormalEquations& eqs);

/// Jacobi-preconditioned conjugate gradient to ||A x - b|| <= tol ||b||.
Eigen::VectorXd solve_pcg(const NormalEquations& eqs, double tol, int max_iter);
Eigen::VectorXd solve_pcg(const SparseNormalEquations& eqs, double tol, int max_iter);

enum class SolverKind { Cholesky, PCG };

struct LinearSolver {
  SolverKind kind = SolverKind::Cholesky;
  double tolerance = 1e-10;
  int max_iterations = 0;  // 0: 10 * n
};

}  // namespace lieopt::optim
