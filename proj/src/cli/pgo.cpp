#include <cmath>
#include <fstream>
#include <ostream>

#include "io.hpp"
#include "lieopt/cli.hpp"
#include "lieopt/error.hpp"
#include "lieopt/pose_graph.hpp"

namespace lieopt::cli {

namespace {

optim::Kernel make_kernel(const RunConfig& cfg) {
  if (cfg.kernel == "huber") return optim::Kernel::huber(cfg.kernel_delta);
  if (cfg.kernel == "cauchy") return optim::Kernel::cauchy(cfg.kernel_delta);
  return optim::Kernel::trivial();
}

optim::Strategy make_strategy(const RunConfig& cfg) {
  if (cfg.strategy == "constant") return optim::Strategy::constant(cfg.damping);
  if (cfg.strategy == "adaptive") return optim::Strategy::adaptive(cfg.damping);
  return optim::Strategy::trust_region(cfg.damping);
}

std::string default_output(const std::string& input) {
  const auto dot = input.rfind(".g2o");
  return (dot == std::string::npos ? input : input.substr(0, dot)) + "_opt.g2o";
}

}  // namespace

int cmd_pgo(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::ifstream in(cfg.input);
  if (!in) {
    err << "pgo: cannot open " << cfg.input << '\n';
    return kInputError;
  }
  pgo::PoseGraph graph;
  try {
    std::vector<std::string> warnings;
    graph = pgo::parse_g2o(in, &warnings);
    for (const auto& w : warnings) err << "pgo: warning: " << w << '\n';
  } catch (const Error& e) {
    err << "pgo: " << cfg.input << ": " << e.what() << '\n';
    return kInputError;
  }

  pgo::PGOConfig config;
  config.kernel = make_kernel(cfg);
  config.strategy = make_strategy(cfg);
  config.solver.kind = cfg.solver == "pcg" ? optim::SolverKind::PCG : optim::SolverKind::Cholesky;
  config.solver.tolerance = cfg.solver_tol;
  config.steps = cfg.steps;
  config.patience = cfg.patience;
  config.decreasing = cfg.decreasing;
  config.verbose = cfg.verbose ? &err : nullptr;

  pgo::PGOResult result;
  try {
    result = pgo::optimize_pgo(graph, config);
  } catch (const Error& e) {
    err << "pgo: " << e.what() << '\n';
    return kNumericalFailure;
  }
  for (pgo::NodeId id : result.stats.unreached) err << "pgo: warning: node " << id << " is not connected to the anchor\n";

  const std::string output = cfg.output.empty() ? default_output(cfg.input) : cfg.output;
  if (!with_output(output, out, [&](std::ostream& o) { pgo::write_g2o(result.graph, o); })) {
    err << "pgo: cannot write " << output << '\n';
    return kInputError;
  }
  const std::string json = pgo::stats_json(result.stats);
  if (!with_output(cfg.stats, out, [&](std::ostream& o) { o << json << '\n'; })) {
    err << "pgo: cannot write " << cfg.stats << '\n';
    return kInputError;
  }

  if (result.stats.reason == optim::StopReason::Failed || result.stats.reason == optim::StopReason::Diverged ||
      !std::isfinite(result.stats.final_chi2)) {
    err << "pgo: optimization failed (" << optim::to_string(result.stats.reason) << ")\n";
    return kNumericalFailure;
  }
  if (cfg.reference_chi2) {
    const double ref = *cfg.reference_chi2;
    const double rel = std::abs(result.stats.final_chi2 - ref) / std::abs(ref);
    if (!(rel < 0.01)) {
      err << "pgo: final chi2 " << result.stats.final_chi2 << " differs from reference " << ref << " by "
          << rel * 100.0 << "%\n";
      return kNumericalFailure;
    }
  }
  return kSuccess;
}

int cmd_gen_circle(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  pgo::CircleOptions options;
  options.nodes = cfg.nodes;
  options.radius = cfg.radius;
  options.translation_noise = cfg.translation_noise;
  options.rotation_noise = cfg.rotation_noise;
  options.measurement_translation_noise = cfg.measurement_translation_noise;
  options.measurement_rotation_noise = cfg.measurement_rotation_noise;
  options.seed = cfg.seed;
  pgo::SyntheticGraph g;
  try {
    g = pgo::make_noisy_circle(options);
  } catch (const Error& e) {
    err << "gen-circle: " << e.what() << '\n';
    return kInputError;
  }
  if (!with_output(cfg.output, out, [&](std::ostream& o) { pgo::write_g2o(g.initial, o); })) {
    err << "gen-circle: cannot write " << cfg.output << '\n';
    return kInputError;
  }
  return kSuccess;
}

}  // namespace lieopt::cli
