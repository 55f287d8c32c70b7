#pragma once

#include <string>

namespace lieopt::optim {

/// Robust kernel rho applied to a squared cost c = R^T W R.
class Kernel {
 public:
  enum class Type { Trivial, Huber, Cauchy };

  Kernel() = default;
  static Kernel trivial() { return Kernel(Type::Trivial, 1.0); }
  static Kernel huber(double delta);
  static Kernel cauchy(double delta);

  Type type() const noexcept { return type_; }
  double delta() const noexcept { return delta_; }
  std::string name() const;

 private:
  Kernel(Type type, double delta) : type_(type), delta_(delta) {}

  Type type_ = Type::Trivial;
  double delta_ = 1.0;
};

struct KernelValue {
  double rho;
  double derivative;
};

/// (rho(c), rho'(c)). Huber: identity up to delta^2, then 2 delta sqrt(c) -
/// delta^2. Cauchy: delta^2 ln(1 + c / delta^2). Throws DomainError for c < 0.
KernelValue apply_kernel(const Kernel& kernel, double c);

}  // namespace lieopt::optim
