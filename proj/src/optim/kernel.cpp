#include "lieopt/optim/kernel.hpp"

#include <cmath>

#include "lieopt/error.hpp"

namespace lieopt::optim {

Kernel Kernel::huber(double delta) {
  if (!(delta > 0.0)) throw DomainError("Huber delta must be positive");
  return Kernel(Type::Huber, delta);
}

Kernel Kernel::cauchy(double delta) {
  if (!(delta > 0.0)) throw DomainError("Cauchy delta must be positive");
  return Kernel(Type::Cauchy, delta);
}

std::string Kernel::name() const {
  switch (type_) {
    case Type::Trivial: return "trivial";
    case Type::Huber: return "huber";
    case Type::Cauchy: return "cauchy";
  }
  return "?";
}

KernelValue apply_kernel(const Kernel& kernel, double c) {
  if (!(c >= 0.0)) throw DomainError("kernel cost must be non-negative");
  const double d = kernel.delta();
  const double d2 = d * d;
  switch (kernel.type()) {
    case Kernel::Type::Trivial: return {c, 1.0};
    case Kernel::Type::Huber: {
      if (c <= d2) return {c, 1.0};
      const double root = std::sqrt(c);
      return {2.0 * d * root - d2, d / root};
    }
    case Kernel::Type::Cauchy: return {d2 * std::log1p(c / d2), 1.0 / (1.0 + c / d2)};
  }
  return {c, 1.0};
}

}  // namespace lieopt::optim
