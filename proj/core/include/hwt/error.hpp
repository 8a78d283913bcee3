#pragma once

#include <stdexcept>
#include <string>

namespace hwt {

/// Shapes that do not conform for the requested operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Arguments outside an operation's domain (k out of range, bad bounds, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised by inverse() when the unfolded matrix is numerically singular.
class SingularError : public std::runtime_error {
 public:
  SingularError(const std::string& what, double condition_estimate)
      : std::runtime_error(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

/// Raised for inputs that must be Hermitian but are not.
class NotHermitianError : public std::invalid_argument {
 public:
  NotHermitianError(const std::string& what, double asymmetry)
      : std::invalid_argument(what), asymmetry_(asymmetry) {}

  double asymmetry() const noexcept { return asymmetry_; }

 private:
  double asymmetry_;
};

/// Malformed fixture or config text.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hwt
