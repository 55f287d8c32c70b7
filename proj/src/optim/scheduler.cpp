#include "lieopt/optim/scheduler.hpp"

#include <cmath>

namespace lieopt::optim {

std::string_view to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::Budget: return "budget";
    case StopReason::Plateau: return "plateau";
    case StopReason::Diverged: return "diverged";
    case StopReason::Converged: return "converged";
    case StopReason::Failed: return "failed";
  }
  return "?";
}

StopOnPlateau::StopOnPlateau(int steps, int patience, double decreasing, std::ostream* verbose)
    : steps_(steps), patience_(patience), decreasing_(decreasing), verbose_(verbose) {}

std::optional<StopReason> StopOnPlateau::step(double loss) {
  if (stopped_) return reason_;
  ++count_;
  if (std::isnan(loss)) {
    reason_ = StopReason::Diverged;
  } else {
    if (has_last_ && last_ - loss < decreasing_) {
      ++flat_;
    } else {
      flat_ = 0;
    }
    has_last_ = true;
    last_ = loss;
    if (flat_ >= patience_) {
      reason_ = StopReason::Plateau;
    } else if (count_ >= steps_) {
      reason_ = StopReason::Budget;
    }
  }
  if (verbose_) {
    *verbose_ << "StopOnPlateau on step " << count_ << " loss " << loss;
    if (reason_) *verbose_ << " -> stop (" << to_string(*reason_) << ")";
    *verbose_ << '\n';
  }
  stopped_ = reason_.has_value();
  return reason_;
}

}  // namespace lieopt::optim
