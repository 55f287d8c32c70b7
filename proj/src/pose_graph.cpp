#include "lieopt/pose_graph.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <istream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "json.hpp"
#include "lieopt/detail/group_math.hpp"
#include "lieopt/error.hpp"
#include "lieopt/lie_core.hpp"
#include "lieopt/parallel.hpp"

namespace lieopt::pgo {

using detail::Quat;
using detail::Vec3;

namespace {

Vec3<double> translation(const Pose& p) { return p.head<3>(); }
Quat<double> rotation(const Pose& p) { return Quat<double>(p[6], p[3], p[4], p[5]); }

/// Z^-1 * Xi^-1 * Xj as (t, q).
void relative_error(const Pose& from, const Pose& to, const Pose& z, Vec3<double>& t, Quat<double>& q) {
  const Quat<double> qi_inv = rotation(from).conjugate();
  const Quat<double> qz_inv = rotation(z).conjugate();
  const Vec3<double> t_ij = qi_inv * (translation(to) - translation(from));
  q = (qz_inv * (qi_inv * rotation(to))).normalized();
  t = qz_inv * (t_ij - translation(z));
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

double to_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError(line, "invalid number '" + std::string(tok) + "'");
  }
  return v;
}

NodeId to_id(std::string_view tok, std::size_t line) {
  NodeId v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "invalid id '" + std::string(tok) + "'");
  }
  return v;
}

Pose read_pose(const std::vector<std::string_view>& tok, std::size_t first, std::size_t line,
               std::vector<std::string>* warnings) {
  Pose p;
  for (int k = 0; k < 7; ++k) p[k] = to_double(tok[first + static_cast<std::size_t>(k)], line);
  const double norm = p.tail<4>().norm();
  if (norm == 0.0) throw ParseError(line, "zero quaternion");
  if (std::abs(norm - 1.0) > 1e-3 && warnings) {
    warnings->push_back("line " + std::to_string(line) + ": quaternion norm " + std::to_string(norm) +
                        " renormalized");
  }
  p.tail<4>() /= norm;
  return p;
}

void format_number(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

Pose identity_pose() {
  Pose p = Pose::Zero();
  p[6] = 1.0;
  return p;
}

Pose make_pose(const Eigen::Vector3d& t, const Eigen::Quaterniond& q) {
  Pose p;
  p.head<3>() = t;
  const Eigen::Quaterniond n = q.normalized();
  p[3] = n.x();
  p[4] = n.y();
  p[5] = n.z();
  p[6] = n.w();
  return p;
}

void PoseGraph::validate() const {
  if (!nodes.empty() && !nodes.count(anchor)) {
    throw GraphError("anchor node " + std::to_string(anchor) + " does not exist");
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    if (!nodes.count(edge.from) || !nodes.count(edge.to)) {
      throw GraphError("edge " + std::to_string(e) + " (" + std::to_string(edge.from) + " -> " +
                       std::to_string(edge.to) + ") references a missing vertex");
    }
    const Matrix6& info = edge.information;
    if ((info - info.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
      throw GraphError("edge " + std::to_string(e) + " information matrix is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Matrix6> eig(info, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-9) {
      throw GraphError("edge " + std::to_string(e) + " information matrix is not positive semidefinite");
    }
  }
}

PoseGraph parse_g2o(std::istream& in, std::vector<std::string>* warnings) {
  PoseGraph graph;
  std::vector<std::size_t> edge_lines;
  bool fixed = false;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto tok = split(text);
    const std::string_view tag = tok.front();
    if (tag == "VERTEX_SE3:QUAT") {
      if (tok.size() != 9) {
        throw ParseError(line, "VERTEX_SE3:QUAT expects 8 fields, got " + std::to_string(tok.size() - 1));
      }
      const NodeId id = to_id(tok[1], line);
      if (!graph.nodes.emplace(id, read_pose(tok, 2, line, warnings)).second) {
        throw ParseError(line, "duplicate vertex " + std::to_string(id));
      }
    } else if (tag == "EDGE_SE3:QUAT") {
      if (tok.size() != 31) {
        throw ParseError(line, "EDGE_SE3:QUAT expects 30 fields (2 ids, 7 pose values, 21 information "
                               "entries), got " + std::to_string(tok.size() - 1));
      }
      Edge edge;
      edge.from = to_id(tok[1], line);
      edge.to = to_id(tok[2], line);
      edge.measurement = read_pose(tok, 3, line, warnings);
      std::size_t k = 10;
      for (int r = 0; r < 6; ++r) {
        for (int c = r; c < 6; ++c) {
          edge.information(r, c) = edge.information(c, r) = to_double(tok[k++], line);
        }
      }
      graph.edges.push_back(edge);
      edge_lines.push_back(line);
    } else if (tag == "FIX") {
      if (tok.size() != 2) throw ParseError(line, "FIX expects one id");
      graph.anchor = to_id(tok[1], line);
      fixed = true;
    } else if (warnings) {
      warnings->push_back("line " + std::to_string(line) + ": skipped unsupported record " + std::string(tag));
    }
  }
  if (!fixed && !graph.nodes.empty()) graph.anchor = graph.nodes.begin()->first;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const Edge& edge = graph.edges[e];
    if (!graph.nodes.count(edge.from) || !graph.nodes.count(edge.to)) {
      throw GraphError("line " + std::to_string(edge_lines[e]) + ": edge references a missing vertex");
    }
  }
  graph.validate();
  return graph;
}

PoseGraph parse_g2o(const std::string& text, std::vector<std::string>* warnings) {
  std::istringstream in(text);
  return parse_g2o(in, warnings);
}

void write_g2o(const PoseGraph& graph, std::ostream& out) {
  for (const auto& [id, pose] : graph.nodes) {
    out << "VERTEX_SE3:QUAT " << id;
    for (int k = 0; k < 7; ++k) {
      out << ' ';
      format_number(out, pose[k]);
    }
    out << '\n';
  }
  for (const Edge& edge : graph.edges) {
    out << "EDGE_SE3:QUAT " << edge.from << ' ' << edge.to;
    for (int k = 0; k < 7; ++k) {
      out << ' ';
      format_number(out, edge.measurement[k]);
    }
    for (int r = 0; r < 6; ++r) {
      for (int c = r; c < 6; ++c) {
        out << ' ';
        format_number(out, edge.information(r, c));
      }
    }
    out << '\n';
  }
  if (!graph.nodes.empty()) out << "FIX " << graph.anchor << '\n';
}

std::string write_g2o(const PoseGraph& graph) {
  std::ostringstream out;
  write_g2o(graph, out);
  return out.str();
}

Vector6 edge_residual(const Pose& from, const Pose& to, const Pose& measurement) {
  Vec3<double> t, rho, phi;
  Quat<double> q;
  relative_error(from, to, measurement, t, q);
  detail::se3_log(t, q, rho, phi);
  Vector6 r;
  r << rho, phi;
  return r;
}

LieBatch edge_residual(const LieBatch& from, const LieBatch& to, const LieBatch& measurement) {
  return log_map(compose(inverse(measurement), compose(inverse(from), to)));
}

EdgeJacobians edge_jacobians(const Pose& from, const Pose& to, const Pose& measurement) {
  const Vector6 r = edge_residual(from, to, measurement);
  // M = (Xi Z)^-1, so that perturbing Xj by Exp(d) moves the error by Exp(Ad_M d).
  const Quat<double> qi = rotation(from);
  const Quat<double> qiz = (qi * rotation(measurement)).normalized();
  const Vec3<double> tiz = translation(from) + qi * translation(measurement);
  const Quat<double> qm = qiz.conjugate();
  const Vec3<double> tm = -(qm * tiz);
  const Matrix6 J = detail::se3_left_jacobian_inverse<double>(r) * detail::se3_adjoint(tm, qm);
  return {-J, J};
}

double chi2(const PoseGraph& graph) {
  double total = 0.0;
  for (const Edge& edge : graph.edges) {
    const Vector6 r = edge_residual(graph.nodes.at(edge.from), graph.nodes.at(edge.to), edge.measurement);
    total += r.dot(edge.information * r);
  }
  return total;
}

std::vector<NodeId> unreached_nodes(const PoseGraph& graph) {
  std::map<NodeId, std::vector<NodeId>> adjacency;
  for (const Edge& e : graph.edges) {
    adjacency[e.from].push_back(e.to);
    adjacency[e.to].push_back(e.from);
  }
  std::set<NodeId> seen;
  std::deque<NodeId> queue;
  if (graph.nodes.count(graph.anchor)) {
    seen.insert(graph.anchor);
    queue.push_back(graph.anchor);
  }
  while (!queue.empty()) {
    const NodeId n = queue.front();
    queue.pop_front();
    for (NodeId m : adjacency[n]) {
      if (seen.insert(m).second) queue.push_back(m);
    }
  }
  std::vector<NodeId> out;
  for (const auto& [id, pose] : graph.nodes) {
    if (!seen.count(id)) out.push_back(id);
  }
  return out;
}

PoseGraphModel::PoseGraphModel(const PoseGraph& graph, bool analytic_jacobians)
    : graph_(graph), analytic_(analytic_jacobians) {
  graph_.validate();
  for (const auto& [id, pose] : graph_.nodes) {
    if (id == graph_.anchor) continue;
    free_index_[id] = free_ids_.size();
    free_ids_.push_back(id);
  }
}

ParamSet PoseGraphModel::parameters() const {
  std::vector<double> data;
  data.reserve(free_ids_.size() * 7);
  for (NodeId id : free_ids_) {
    const Pose& p = graph_.nodes.at(id);
    data.insert(data.end(), p.data(), p.data() + 7);
  }
  ParamSet params;
  params.add(LieBatch(Kind::SE3, Shape{free_ids_.size()}, std::move(data)));
  return params;
}

PoseGraph PoseGraphModel::apply(const ParamSet& theta) const {
  PoseGraph out = graph_;
  const LieBatch& poses = theta.group(0);
  for (std::size_t i = 0; i < free_ids_.size(); ++i) {
    out.nodes[free_ids_[i]] = Eigen::Map<const Pose>(poses.item(i).data());
  }
  return out;
}

std::vector<optim::ResidualBlock> PoseGraphModel::blocks(const ParamSet& theta, bool with_jacobian) const {
  const LieBatch& poses = theta.group(0);
  auto pose_of = [&](NodeId id) -> Pose {
    const auto it = free_index_.find(id);
    if (it == free_index_.end()) return graph_.nodes.at(id);
    return Eigen::Map<const Pose>(poses.item(it->second).data());
  };

  std::vector<optim::ResidualBlock> out(graph_.edges.size());
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      const Edge& edge = graph_.edges[e];
      const Pose xi = pose_of(edge.from);
      const Pose xj = pose_of(edge.to);
      auto& blk = out[e];
      blk.residual = edge_residual(xi, xj, edge.measurement);
      blk.weight = edge.information;
      if (!with_jacobian) continue;

      EdgeJacobians J;
      if (analytic_) {
        J = edge_jacobians(xi, xj, edge.measurement);
      } else {
        std::vector<double> pair(xi.data(), xi.data() + 7);
        pair.insert(pair.end(), xj.data(), xj.data() + 7);
        ParamSet local;
        local.add(LieBatch(Kind::SE3, Shape{2}, std::move(pair)));
        const Pose z = edge.measurement;
        const Eigen::MatrixXd num = numeric_jacobian(
            [&z](const ParamSet& p) -> Eigen::VectorXd {
              const LieBatch& b = p.group(0);
              return edge_residual(Pose(Eigen::Map<const Pose>(b.item(0).data())),
                                   Pose(Eigen::Map<const Pose>(b.item(1).data())), z);
            },
            local);
        J.from = num.leftCols<6>();
        J.to = num.rightCols<6>();
      }

      const auto fi = free_index_.find(edge.from);
      const auto fj = free_index_.find(edge.to);
      const bool free_i = fi != free_index_.end();
      const bool free_j = fj != free_index_.end();
      if (!free_i && !free_j) {
        // Both ends frozen: a constant term with no free columns.
        blk.jacobian = Eigen::MatrixXd::Zero(6, theta.tangent_dim());
        continue;
      }
      if (free_i && free_j && edge.from == edge.to) {
        blk.jacobian = J.from + J.to;
        for (int c = 0; c < 6; ++c) blk.columns.push_back(static_cast<Eigen::Index>(fi->second * 6) + c);
        continue;
      }
      blk.jacobian.resize(6, 6 * (int(free_i) + int(free_j)));
      Eigen::Index col = 0;
      if (free_i) {
        blk.jacobian.middleCols<6>(col) = J.from;
        for (int c = 0; c < 6; ++c) blk.columns.push_back(static_cast<Eigen::Index>(fi->second * 6) + c);
        col += 6;
      }
      if (free_j) {
        blk.jacobian.middleCols<6>(col) = J.to;
        for (int c = 0; c < 6; ++c) blk.columns.push_back(static_cast<Eigen::Index>(fj->second * 6) + c);
      }
    }
  }, 64);
  return out;
}

std::string stats_json(const PGOStats& stats) {
  nlohmann::ordered_json j;
  j["initial_chi2"] = stats.initial_chi2;
  j["final_chi2"] = stats.final_chi2;
  j["iterations"] = stats.iterations;
  j["accepted"] = stats.accepted;
  j["rejected"] = stats.rejected;
  j["wall_time_s"] = stats.wall_time_s;
  j["stop_reason"] = std::string(optim::to_string(stats.reason));
  return j.dump(2);
}

PGOResult optimize_pgo(const PoseGraph& graph, const PGOConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  PGOResult result;
  result.stats.unreached = unreached_nodes(graph);
  result.stats.initial_chi2 = chi2(graph);

  const PoseGraphModel model(graph, config.analytic_jacobians);
  optim::LMOptions options;
  options.kernel = config.kernel;
  options.strategy = config.strategy;
  options.solver = config.solver;
  if (model.parameters().tangent_dim() > options.dense_limit && config.solver.kind == optim::SolverKind::Cholesky) {
    options.solver.kind = optim::SolverKind::PCG;
  }

  const optim::OptimizeResult run = optim::optimize(
      model, model.parameters(), options,
      optim::StopOnPlateau(config.steps, config.patience, config.decreasing, config.verbose));

  result.graph = model.apply(run.params);
  result.stats.final_chi2 = chi2(result.graph);
  result.stats.iterations = run.iterations;
  result.stats.accepted = run.accepted;
  result.stats.rejected = run.rejected;
  result.stats.reason = run.reason;
  result.stats.accepted_losses = run.accepted_losses;
  result.stats.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SyntheticGraph make_noisy_circle(const CircleOptions& options) {
  if (options.nodes < 2) throw DomainError("make_noisy_circle: need at least two nodes");
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto noise = [&](double sigma_t, double sigma_r) {
    Eigen::Matrix<double, 6, 1> xi;
    for (int k = 0; k < 3; ++k) xi[k] = sigma_t * normal(rng);
    for (int k = 3; k < 6; ++k) xi[k] = sigma_r * normal(rng);
    Vec3<double> t;
    Quat<double> q;
    detail::se3_exp<double>(xi.head<3>(), xi.tail<3>(), t, q);
    return make_pose(t, q);
  };
  auto compose_pose = [](const Pose& a, const Pose& b) {
    return make_pose(translation(a) + rotation(a) * translation(b), rotation(a) * rotation(b));
  };
  auto between = [](const Pose& a, const Pose& b) {
    const Quat<double> ai = rotation(a).conjugate();
    return make_pose(ai * (translation(b) - translation(a)), ai * rotation(b));
  };

  SyntheticGraph out;
  const int n = options.nodes;
  for (int k = 0; k < n; ++k) {
    const double angle = 2.0 * M_PI * k / n;
    const Eigen::Vector3d t(options.radius * std::cos(angle), options.radius * std::sin(angle), 0.0);
    const Eigen::Quaterniond q(Eigen::AngleAxisd(angle + M_PI / 2.0, Eigen::Vector3d::UnitZ()));
    out.truth.nodes[k] = make_pose(t, q);
  }

  Matrix6 info = Matrix6::Identity();
  const double st = std::max(options.translation_noise, 1e-3);
  const double sr = std::max(options.rotation_noise, 1e-3);
  info.topLeftCorner<3, 3>() *= 1.0 / (st * st);
  info.bottomRightCorner<3, 3>() *= 1.0 / (sr * sr);

  auto add_edge = [&](int i, int j) {
    Edge e;
    e.from = i;
    e.to = j;
    e.measurement = between(out.truth.nodes[i], out.truth.nodes[j]);
    if (options.measurement_translation_noise > 0.0 || options.measurement_rotation_noise > 0.0) {
      e.measurement = compose_pose(
          e.measurement, noise(options.measurement_translation_noise, options.measurement_rotation_noise));
    }
    e.information = info;
    out.truth.edges.push_back(e);
  };
  for (int k = 0; k + 1 < n; ++k) add_edge(k, k + 1);
  add_edge(n - 1, 0);

  out.initial = out.truth;
  out.initial.nodes[0] = out.truth.nodes[0];
  for (int k = 0; k + 1 < n; ++k) {
    const Pose step = compose_pose(out.truth.edges[static_cast<std::size_t>(k)].measurement,
                                   noise(options.translation_noise, options.rotation_noise));
    out.initial.nodes[k + 1] = compose_pose(out.initial.nodes[k], step);
  }
  out.truth.anchor = out.initial.anchor = 0;
  return out;
}

}  // namespace lieopt::pgo
