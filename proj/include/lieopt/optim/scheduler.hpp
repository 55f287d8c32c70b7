#pragma once

#include <optional>
#include <ostream>
#include <string_view>

namespace lieopt::optim {

enum class StopReason { Budget, Plateau, Diverged, Converged, Failed };

std::string_view to_string(StopReason r) noexcept;

/// Stops after `steps` calls, or once the loss decrease has stayed below
/// `decreasing` for `patience` consecutive calls. A NaN loss stops at once.
class StopOnPlateau {
 public:
  StopOnPlateau(int steps, int patience, double decreasing, std::ostream* verbose = nullptr);

  /// Feeds the loss after one optimizer step.
  std::optional<StopReason> step(double loss);

  bool continual() const noexcept { return !stopped_; }
  int count() const noexcept { return count_; }
  std::optional<StopReason> reason() const noexcept { return reason_; }

 private:
  int steps_;
  int patience_;
  double decreasing_;
  std::ostream* verbose_;

  int count_ = 0;
  int flat_ = 0;
  bool has_last_ = false;
  double last_ = 0.0;
  bool stopped_ = false;
  std::optional<StopReason> reason_;
};

}  // namespace lieopt::optim
