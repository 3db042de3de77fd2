#pragma once

#include <stdexcept>
#include <string>

namespace relent {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A scalar function was evaluated outside its domain. Carries the offending
/// eigenvalue when raised by the functional calculus.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double at) : Error(what), at_(at) {}
  explicit DomainError(const std::string& what) : Error(what) {}
  double at() const { return at_; }

 private:
  double at_ = 0.0;
};

class SpectrumOutOfRange : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The caller's inputs do not satisfy a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A computed quantity violates a guaranteed property beyond round-off.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

/// A bound was requested for a pair whose relative entropy is +infinity.
class VacuousBound : public Error {
 public:
  using Error::Error;
};

}  // namespace relent
