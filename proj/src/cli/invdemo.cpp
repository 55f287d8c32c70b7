#include <chrono>
#include <cstdio>
#include <ostream>

#include "lieopt/cli.hpp"
#include "lieopt/lie_core.hpp"
#include "lieopt/manifold_diff.hpp"
#include "lieopt/optim/lm.hpp"

namespace lieopt::cli {

InvDemoResult run_invdemo(std::size_t batch, std::uint64_t seed, bool init_inverse, std::ostream* table) {
  const auto start = std::chrono::steady_clock::now();
  const LieBatch input = random_group(Kind::SE3, Shape{batch}, 1.0, seed);
  const LieBatch init = init_inverse ? inverse(input) : random_group(Kind::SE3, Shape{batch}, 1.0, seed + 1);

  optim::FunctionModel model;
  model.residual_dim = 6;
  model.mode = optim::JacobianMode::Batched;
  model.predict = [input](const ParamSet& p) -> Eigen::VectorXd {
    const LieBatch err = log_map(compose(p.group(0), input));
    return Eigen::Map<const Eigen::VectorXd>(err.data().data(), static_cast<Eigen::Index>(err.data().size()));
  };

  optim::LMOptions options;
  options.strategy = optim::Strategy::constant(1e-4);
  ParamSet params;
  params.add(init);

  const optim::OptimizeResult run =
      optim::optimize(model, std::move(params), options, optim::StopOnPlateau(10, 3, 1e-3));

  InvDemoResult result;
  result.losses = run.losses;
  result.iterations = run.iterations;
  result.final_error = run.losses.back();
  result.stop_reason = std::string(optim::to_string(run.reason));
  result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (table) {
    char line[64];
    *table << "iteration        loss\n";
    for (std::size_t i = 0; i < run.losses.size(); ++i) {
      std::snprintf(line, sizeof line, "%9zu  %.6e\n", i, run.losses[i]);
      *table << line;
    }
  }
  return result;
}

int cmd_invdemo(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  const InvDemoResult r = run_invdemo(cfg.batch, cfg.seed, cfg.init_inverse, &out);
  char line[128];
  std::snprintf(line, sizeof line, "batch %zu: final error %.6e after %d iterations (%s, %.3f s)\n", cfg.batch,
                r.final_error, r.iterations, r.stop_reason.c_str(), r.wall_time_s);
  out << line;
  return kSuccess;
}

}  // namespace lieopt::cli
