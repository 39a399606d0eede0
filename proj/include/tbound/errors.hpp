#pragma once

#include <stdexcept>
#include <string>

namespace tbound {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Parameters for which the implemented representation does not exist
/// (e.g. a Beta shape a <= 2 where Gamma(a-2) is needed).
class UnsupportedRegime : public Error {
 public:
  using Error::Error;
};

/// An adaptive integration exhausted its evaluation budget.
class NonConvergent : public Error {
 public:
  using Error::Error;
};

/// An integrand returned NaN or an infinity at an evaluated node.
class NonFiniteIntegrand : public Error {
 public:
  NonFiniteIntegrand(const std::string& what, double at)
      : Error(what + " (at x=" + std::to_string(at) + ")"), at_(at) {}
  double at() const noexcept { return at_; }

 private:
  double at_;
};

/// A moment matrix Q is singular or too ill-conditioned to invert.
class SingularQ : public Error {
 public:
  SingularQ(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// A least-squares fit has no unique solution (constant regressor,
/// non-concave quadratic, ...).
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

/// The natural parameter eta(theta) is not affine in theta.
class NotNaturalParameter : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tbound
