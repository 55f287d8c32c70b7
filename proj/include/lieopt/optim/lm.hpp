#pragma once

#include <vector>

#include "lieopt/manifold_diff.hpp"
#include "lieopt/optim/kernel.hpp"
#include "lieopt/optim/linear_solver.hpp"
#include "lieopt/optim/model.hpp"
#include "lieopt/optim/scheduler.hpp"
#include "lieopt/optim/strategy.hpp"

namespace lieopt::optim {

struct LMOptions {
  Kernel kernel;
  Strategy strategy;
  LinearSolver solver;
  int max_retries = 8;
  /// Above this many tangent dimensions the normal equations are assembled
  /// sparse.
  Eigen::Index dense_limit = 1800;
};

struct OptState {
  ParamSet params;
  StrategyState strategy;
  double loss = 0.0;
  int iteration = 0;
};

/// Evaluates the starting loss and damping.
OptState initial_state(const Model& model, ParamSet params, const LMOptions& options);

enum class StepStatus {
  Accepted,
  Converged,  // zero step: already at a stationary point
  Rejected,   // every retry was refused
};

struct StepReport {
  StepStatus status = StepStatus::Rejected;
  double loss_before = 0.0;
  double loss_after = 0.0;
  double gain = 0.0;
  int rejected = 0;
};

/// One LM iteration: evaluate, FastTriggs-correct, assemble and solve the
/// damped normal equations, retract, and let the strategy accept or reject.
/// Rejections retry with the new damping up to options.max_retries times.
StepReport lm_step(OptState& state, const Model& model, const LMOptions& options);

struct OptimizeResult {
  ParamSet params;
  StopReason reason = StopReason::Budget;
  std::vector<double> losses;           // loss after every iteration, first entry initial
  std::vector<double> accepted_losses;  // initial loss then every accepted step
  int iterations = 0;
  int accepted = 0;
  int rejected = 0;
};

/// Runs lm_step under a StopOnPlateau scheduler. Solver errors end the run
/// with reason Failed and the last accepted parameters.
OptimizeResult optimize(const Model& model, ParamSet params, const LMOptions& options, StopOnPlateau scheduler);

}  // namespace lieopt::optim
