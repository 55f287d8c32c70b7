#include "lieopt/optim/strategy.hpp"

#include <algorithm>
#include <cmath>

namespace lieopt::optim {

StrategyState initial_strategy_state(const Strategy& strategy) {
  return {std::clamp(strategy.damping, strategy.lambda_min, strategy.lambda_max), 2.0};
}

StrategyDecision strategy_update(const Strategy& strategy, StrategyState& state, double gain) {
  const bool accept = gain > 0.0;
  double lambda = state.lambda;
  switch (strategy.kind) {
    case StrategyKind::Constant: break;
    case StrategyKind::Adaptive:
      if (gain > 0.75) {
        lambda /= strategy.down;
      } else if (gain < 0.25) {
        lambda *= strategy.up;
      }
      break;
    case StrategyKind::TrustRegion:
      if (accept) {
        const double t = 2.0 * gain - 1.0;
        lambda *= std::max(1.0 / 3.0, 1.0 - t * t * t);
        state.nu = 2.0;
      } else {
        lambda *= state.nu;
        state.nu *= 2.0;
      }
      break;
  }
  state.lambda = std::clamp(lambda, strategy.lambda_min, strategy.lambda_max);
  return {state.lambda, accept};
}

}  // namespace lieopt::optim
