#pragma once

namespace lieopt::optim {

enum class StrategyKind { Constant, Adaptive, TrustRegion };

/// Damping policy for LM.
struct Strategy {
  StrategyKind kind = StrategyKind::TrustRegion;
  double damping = 1e-4;  // initial (or fixed, for Constant) lambda
  double up = 2.0;        // Adaptive
  double down = 2.0;      // Adaptive
  double lambda_min = 1e-12;
  double lambda_max = 1e12;

  static Strategy constant(double damping) { return {StrategyKind::Constant, damping}; }
  static Strategy adaptive(double damping = 1e-4) { return {StrategyKind::Adaptive, damping}; }
  static Strategy trust_region(double damping = 1e-4) { return {StrategyKind::TrustRegion, damping}; }
};

struct StrategyState {
  double lambda = 1e-4;
  double nu = 2.0;  // Nielsen rejection multiplier
};

StrategyState initial_strategy_state(const Strategy& strategy);

struct StrategyDecision {
  double lambda;
  bool accept;
};

/// Updates damping from the gain ratio g = actual / predicted reduction.
///   Constant:    lambda kept, accept iff g > 0 (the loss went down).
///   Adaptive:    accept iff g > 0; lambda / down when g > 0.75, lambda * up
///                when g < 0.25.
///   TrustRegion: accept iff g > 0; accepted steps scale lambda by
///                max(1/3, 1 - (2g - 1)^3) and reset nu to 2, rejected steps
///                scale by nu and double it.
/// The result is clamped to [lambda_min, lambda_max].
StrategyDecision strategy_update(const Strategy& strategy, StrategyState& state, double gain);

}  // namespace lieopt::optim
