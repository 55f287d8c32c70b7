#include "lieopt/optim/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include "lieopt/error.hpp"

namespace lieopt::optim {

namespace {

/// Calls visit(i, global_i, j, global_j) over the block's columns.
template <typename Visit>
void for_each_column_pair(const ResidualBlock& blk, Eigen::Index n, Visit visit) {
  const Eigen::Index k = blk.jacobian.cols();
  for (Eigen::Index a = 0; a < k; ++a) {
    const Eigen::Index ga = blk.columns.empty() ? a : blk.columns[static_cast<std::size_t>(a)];
    if (ga >= n) throw ShapeError("residual block column out of range");
    for (Eigen::Index c = 0; c < k; ++c) {
      const Eigen::Index gc = blk.columns.empty() ? c : blk.columns[static_cast<std::size_t>(c)];
      visit(a, ga, c, gc);
    }
  }
}

void check_block(const ResidualBlock& blk, Eigen::Index n) {
  const Eigen::Index d = blk.residual.size();
  if (blk.jacobian.rows() != d || blk.weight.rows() != d || blk.weight.cols() != d) {
    throw ShapeError("residual block dimensions are inconsistent");
  }
  const Eigen::Index expected = blk.columns.empty() ? n : static_cast<Eigen::Index>(blk.columns.size());
  if (blk.jacobian.cols() != expected) throw ShapeError("residual block Jacobian has the wrong column count");
}

Eigen::VectorXd floored_diagonal(const Eigen::VectorXd& diag) {
  return diag.cwiseMax(kDampingFloor);
}

template <typename Matrix>
Eigen::VectorXd pcg(const Matrix& A, const Eigen::VectorXd& b, double tol, int max_iter) {
  const Eigen::Index n = b.size();
  if (max_iter <= 0) max_iter = static_cast<int>(std::max<Eigen::Index>(10 * n, 10));
  const double b_norm = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (b_norm == 0.0) return x;

  Eigen::VectorXd inv_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = A.coeff(i, i);
    inv_diag[i] = d > 0.0 ? 1.0 / d : 1.0;
  }
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd Ap = A * p;
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) throw SolverError("PCG: matrix is not positive definite", r.norm());
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    if (r.norm() <= tol * b_norm) {
      // Recompute the true residual; the recurrence drifts on ill-conditioned systems.
      r = b - A * x;
      if (r.norm() <= tol * b_norm) return x;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  const double residual = (b - A * x).norm();
  throw SolverError("PCG did not converge, residual norm " + std::to_string(residual), residual);
}

}  // namespace

NormalEquations build_normal_equations(std::span<const ResidualBlock> blocks, double lambda, Eigen::Index n) {
  if (!(lambda >= 0.0)) throw DomainError("damping must be non-negative");
  NormalEquations eqs;
  eqs.A = Eigen::MatrixXd::Zero(n, n);
  eqs.b = Eigen::VectorXd::Zero(n);
  for (const auto& blk : blocks) {
    check_block(blk, n);
    const Eigen::MatrixXd WJ = blk.weight * blk.jacobian;
    const Eigen::MatrixXd H = blk.jacobian.transpose() * WJ;
    const Eigen::VectorXd g = WJ.transpose() * blk.residual;
    if (blk.columns.empty()) {
      eqs.A += H;
      eqs.b -= g;
    } else {
      for_each_column_pair(blk, n, [&](Eigen::Index a, Eigen::Index ga, Eigen::Index c, Eigen::Index gc) {
        eqs.A(ga, gc) += H(a, c);
      });
      for (Eigen::Index a = 0; a < g.size(); ++a) eqs.b[blk.columns[static_cast<std::size_t>(a)]] -= g[a];
    }
  }
  eqs.damping = floored_diagonal(eqs.A.diagonal());
  eqs.lambda = lambda;
  eqs.A.diagonal() += lambda * eqs.damping;
  return eqs;
}

SparseNormalEquations build_sparse_normal_equations(std::span<const ResidualBlock> blocks, double lambda,
                                                    Eigen::Index n) {
  if (!(lambda >= 0.0)) throw DomainError("damping must be non-negative");
  std::vector<Eigen::Triplet<double>> triplets;
  SparseNormalEquations eqs;
  eqs.b = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  for (const auto& blk : blocks) {
    check_block(blk, n);
    const Eigen::MatrixXd WJ = blk.weight * blk.jacobian;
    const Eigen::MatrixXd H = blk.jacobian.transpose() * WJ;
    const Eigen::VectorXd g = WJ.transpose() * blk.residual;
    for_each_column_pair(blk, n, [&](Eigen::Index a, Eigen::Index ga, Eigen::Index c, Eigen::Index gc) {
      if (H(a, c) != 0.0) triplets.emplace_back(ga, gc, H(a, c));
      if (ga == gc) diag[ga] += H(a, c);
    });
    for (Eigen::Index a = 0; a < g.size(); ++a) {
      eqs.b[blk.columns.empty() ? a : blk.columns[static_cast<std::size_t>(a)]] -= g[a];
    }
  }
  eqs.damping = floored_diagonal(diag);
  eqs.lambda = lambda;
  for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, lambda * eqs.damping[i]);
  eqs.A.resize(n, n);
  eqs.A.setFromTriplets(triplets.begin(), triplets.end());
  return eqs;
}

void redamp(NormalEquations& eqs, double lambda) {
  eqs.A.diagonal() += (lambda - eqs.lambda) * eqs.damping;
  eqs.lambda = lambda;
}

void redamp(SparseNormalEquations& eqs, double lambda) {
  for (Eigen::Index i = 0; i < eqs.A.rows(); ++i) eqs.A.coeffRef(i, i) += (lambda - eqs.lambda) * eqs.damping[i];
  eqs.lambda = lambda;
}

Eigen::VectorXd solve_cholesky(const NormalEquations& eqs) {
  const Eigen::Index n = eqs.A.rows();
  if (n == 0) return {};
  Eigen::LLT<Eigen::MatrixXd> llt(eqs.A);
  if (llt.info() == Eigen::Success) return llt.solve(eqs.b);
  double jitter = 1e-12 * eqs.A.trace() / static_cast<double>(n);
  for (int attempt = 0; attempt < 3; ++attempt, jitter *= 10.0) {
    llt.compute(eqs.A + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return llt.solve(eqs.b);
  }
  throw SolverError("Cholesky: matrix is not positive definite", eqs.b.norm());
}

Eigen::VectorXd solve_cholesky(const SparseNormalEquations& eqs) {
  const Eigen::Index n = eqs.A.rows();
  if (n == 0) return {};
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(eqs.A);
  if (llt.info() == Eigen::Success) return llt.solve(eqs.b);
  double trace = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) trace += eqs.A.coeff(i, i);
  double jitter = 1e-12 * trace / static_cast<double>(n);
  Eigen::SparseMatrix<double> eye(n, n);
  eye.setIdentity();
  for (int attempt = 0; attempt < 3; ++attempt, jitter *= 10.0) {
    llt.compute(eqs.A + jitter * eye);
    if (llt.info() == Eigen::Success) return llt.solve(eqs.b);
  }
  throw SolverError("sparse Cholesky: matrix is not positive definite", eqs.b.norm());
}

Eigen::VectorXd solve_pcg(const NormalEquations& eqs, double tol, int max_iter) {
  return pcg(eqs.A, eqs.b, tol, max_iter);
}

Eigen::VectorXd solve_pcg(const SparseNormalEquations& eqs, double tol, int max_iter) {
  return pcg(eqs.A, eqs.b, tol, max_iter);
}

}  // namespace lieopt::optim
