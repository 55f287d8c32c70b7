#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "lieopt/lie_batch.hpp"
#include "lieopt/manifold_diff.hpp"
#include "lieopt/optim/lm.hpp"

namespace lieopt::pgo {

using NodeId = std::int64_t;
/// SE3 element in (tx,ty,tz, qx,qy,qz,qw) layout.
using Pose = Eigen::Matrix<double, 7, 1>;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

Pose identity_pose();
Pose make_pose(const Eigen::Vector3d& t, const Eigen::Quaterniond& q);

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  Pose measurement = identity_pose();
  Matrix6 information = Matrix6::Identity();  // (x y z, rx ry rz) ordering
};

struct PoseGraph {
  std::map<NodeId, Pose> nodes;
  std::vector<Edge> edges;
  /// Frozen node. parse_g2o picks the lowest id unless a FIX record says
  /// otherwise.
  NodeId anchor = 0;

  /// Throws GraphError for dangling edges, a missing anchor or an
  /// information matrix that is not symmetric PSD within 1e-9.
  void validate() const;
};

/// Reads VERTEX_SE3:QUAT, EDGE_SE3:QUAT and FIX records. Other records are
/// skipped with a warning; '#' lines are comments. Quaternions are
/// renormalized (with a warning if they were off by more than 1e-3).
PoseGraph parse_g2o(std::istream& in, std::vector<std::string>* warnings = nullptr);
PoseGraph parse_g2o(const std::string& text, std::vector<std::string>* warnings = nullptr);

/// 17 significant digits, so parse_g2o(write_g2o(g)) reproduces g.
void write_g2o(const PoseGraph& graph, std::ostream& out);
std::string write_g2o(const PoseGraph& graph);

/// r = Log(Z^-1 * Xi^-1 * Xj), se3 ordering (rho, phi).
Vector6 edge_residual(const Pose& from, const Pose& to, const Pose& measurement);

/// Batched form over SE3 batches (broadcasting); returns an se3 batch.
LieBatch edge_residual(const LieBatch& from, const LieBatch& to, const LieBatch& measurement);

/// Derivatives of edge_residual under left perturbations Exp(d) * X of each
/// endpoint.
struct EdgeJacobians {
  Matrix6 from;
  Matrix6 to;
};
EdgeJacobians edge_jacobians(const Pose& from, const Pose& to, const Pose& measurement);

/// Sum over edges of r^T * Omega * r.
double chi2(const PoseGraph& graph);

/// Nodes with no path to the anchor.
std::vector<NodeId> unreached_nodes(const PoseGraph& graph);

/// Least-squares model over every node except the anchor. Parameters are a
/// single SE3 batch of the free nodes in ascending id order.
class PoseGraphModel final : public optim::Model {
 public:
  explicit PoseGraphModel(const PoseGraph& graph, bool analytic_jacobians = true);

  ParamSet parameters() const;
  /// Copy of the graph with free nodes taken from theta.
  PoseGraph apply(const ParamSet& theta) const;

  std::vector<optim::ResidualBlock> blocks(const ParamSet& theta, bool with_jacobian) const override;

 private:
  PoseGraph graph_;
  bool analytic_;
  std::map<NodeId, std::size_t> free_index_;
  std::vector<NodeId> free_ids_;
};

struct PGOConfig {
  optim::Kernel kernel;
  optim::Strategy strategy = optim::Strategy::trust_region();
  optim::LinearSolver solver;
  int steps = 50;
  int patience = 3;
  double decreasing = 1e-3;
  bool analytic_jacobians = true;
  std::ostream* verbose = nullptr;
};

struct PGOStats {
  double initial_chi2 = 0.0;
  double final_chi2 = 0.0;
  int iterations = 0;
  int accepted = 0;
  int rejected = 0;
  double wall_time_s = 0.0;
  optim::StopReason reason = optim::StopReason::Budget;
  std::vector<double> accepted_losses;
  std::vector<NodeId> unreached;
};

/// Flat JSON object: initial_chi2, final_chi2, iterations, accepted,
/// rejected, wall_time_s, stop_reason.
std::string stats_json(const PGOStats& stats);

struct PGOResult {
  PoseGraph graph;
  PGOStats stats;
};

/// LM over all edge residuals with the anchor frozen. On solver failure the
/// best accepted iterate is returned and stats.reason is Failed.
PGOResult optimize_pgo(const PoseGraph& graph, const PGOConfig& config = {});

struct CircleOptions {
  int nodes = 100;
  double radius = 10.0;
  /// Noise applied to every odometry increment while dead-reckoning the
  /// initial estimate.
  double translation_noise = 0.05;
  double rotation_noise = 0.02;
  /// Noise added to the stored measurements themselves (0: consistent graph).
  double measurement_translation_noise = 0.0;
  double measurement_rotation_noise = 0.0;
  std::uint64_t seed = 1;
};

struct SyntheticGraph {
  PoseGraph initial;  // noisy starting estimate
  PoseGraph truth;    // ground-truth poses with the same edges
};

/// Planar circle of poses with odometry edges and one loop closure from the
/// last node back to the first.
SyntheticGraph make_noisy_circle(const CircleOptions& options = {});

}  // namespace lieopt::pgo
