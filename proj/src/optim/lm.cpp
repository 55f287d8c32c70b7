#include "lieopt/optim/lm.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <variant>

#include "lieopt/error.hpp"

namespace lieopt::optim {

namespace {

template <typename Eqs>
Eigen::VectorXd solve(const Eqs& eqs, const LinearSolver& solver) {
  if (solver.kind == SolverKind::PCG) return solve_pcg(eqs, solver.tolerance, solver.max_iterations);
  return solve_cholesky(eqs);
}

/// Predicted loss reduction of the linearized model for a solved step.
/// The loss is sum c_i without a 1/2, so the reduction is
/// delta^T (lambda D delta + b).
template <typename Eqs>
double predicted_reduction(const Eqs& eqs, const Eigen::VectorXd& delta) {
  return delta.dot(eqs.lambda * eqs.damping.cwiseProduct(delta) + eqs.b);
}

template <typename Eqs>
StepReport damped_search(OptState& state, const Model& model, const LMOptions& options, Eqs eqs,
                         StepReport report) {
  const int attempts = std::max(options.max_retries, 0) + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    const Eigen::VectorXd delta = solve(eqs, options.solver);
    if (!delta.allFinite()) throw SolverError("linear solve produced a non-finite step", eqs.b.norm());
    if (delta.isZero(0.0)) {
      report.status = StepStatus::Converged;
      report.loss_after = state.loss;
      return report;
    }

    ParamSet candidate = retract(state.params, delta);
    double candidate_loss = std::numeric_limits<double>::infinity();
    try {
      candidate_loss = evaluate(model, candidate, options.kernel, false).loss;
    } catch (const EvaluationError&) {
      // treated as an infinitely bad step
    }
    const double actual = state.loss - candidate_loss;
    const double predicted = predicted_reduction(eqs, delta);
    double gain;
    if (predicted > 0.0) {
      gain = actual / predicted;
    } else {
      gain = actual > 0.0 ? 1.0 : -1.0;
    }
    if (std::isnan(gain)) gain = -1.0;
    report.gain = gain;

    const double lambda_before = state.strategy.lambda;
    const StrategyDecision decision = strategy_update(options.strategy, state.strategy, gain);
    if (decision.accept) {
      state.params = std::move(candidate);
      state.loss = candidate_loss;
      report.status = StepStatus::Accepted;
      report.loss_after = candidate_loss;
      return report;
    }
    ++report.rejected;
    if (decision.lambda == lambda_before) break;  // same system, same step
    redamp(eqs, decision.lambda);
  }
  report.status = StepStatus::Rejected;
  report.loss_after = state.loss;
  return report;
}

}  // namespace

OptState initial_state(const Model& model, ParamSet params, const LMOptions& options) {
  OptState state;
  state.loss = evaluate(model, params, options.kernel, false).loss;
  state.params = std::move(params);
  state.strategy = initial_strategy_state(options.strategy);
  return state;
}

StepReport lm_step(OptState& state, const Model& model, const LMOptions& options) {
  Evaluation ev = evaluate(model, state.params, options.kernel, true);
  state.loss = ev.loss;
  StepReport report;
  report.loss_before = ev.loss;
  ++state.iteration;
  if (ev.loss == 0.0) {
    report.status = StepStatus::Converged;
    report.loss_after = 0.0;
    return report;
  }

  for (auto& blk : ev.blocks) blk = correct_fast_triggs(blk, options.kernel);
  const Eigen::Index n = state.params.tangent_dim();
  if (n > options.dense_limit) {
    return damped_search(state, model, options, build_sparse_normal_equations(ev.blocks, state.strategy.lambda, n),
                         report);
  }
  return damped_search(state, model, options, build_normal_equations(ev.blocks, state.strategy.lambda, n), report);
}

OptimizeResult optimize(const Model& model, ParamSet params, const LMOptions& options, StopOnPlateau scheduler) {
  OptState state = initial_state(model, std::move(params), options);
  OptimizeResult result;
  result.losses.push_back(state.loss);
  result.accepted_losses.push_back(state.loss);

  while (scheduler.continual()) {
    StepReport report;
    try {
      report = lm_step(state, model, options);
    } catch (const SolverError&) {
      result.reason = StopReason::Failed;
      break;
    }
    ++result.iterations;
    result.rejected += report.rejected;
    if (report.status == StepStatus::Accepted) {
      ++result.accepted;
      result.accepted_losses.push_back(state.loss);
    }
    result.losses.push_back(state.loss);
    if (report.status == StepStatus::Converged) {
      result.reason = StopReason::Converged;
      break;
    }
    if (auto stop = scheduler.step(state.loss)) result.reason = *stop;
  }
  result.params = std::move(state.params);
  return result;
}

}  // namespace lieopt::optim
