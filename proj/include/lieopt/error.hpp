#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lieopt {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An algebra kind was passed where a group kind is required, or vice versa.
class InvalidKindError : public Error {
 public:
  using Error::Error;
};

/// Non-finite input, negative sigma, non-positive dt and similar.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A stored group element violates its invariants beyond repair.
class CorruptElementError : public Error {
 public:
  CorruptElementError(std::size_t index, const std::string& what)
      : Error("element " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A user function produced a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(std::size_t index, const std::string& what)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// A user-supplied callable broke a documented requirement.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual_norm)
      : Error(what), residual_norm_(residual_norm) {}
  double residual_norm() const noexcept { return residual_norm_; }

 private:
  double residual_norm_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class GraphError : public Error {
 public:
  using Error::Error;
};

}  // namespace lieopt
