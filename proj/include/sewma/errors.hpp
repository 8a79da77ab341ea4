#pragma once

#include <stdexcept>
#include <string>

namespace sewma {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to produce a trustworthy value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run length is not almost surely finite (or beyond double resolution).
/// `lower_bound` is a valid lower bound for the requested expectation when
/// one could be established, otherwise 0.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, double variance_ratio, double lower_bound = 0.0)
      : NumericalError(what), variance_ratio_(variance_ratio), lower_bound_(lower_bound) {}

  double variance_ratio() const noexcept { return variance_ratio_; }
  double lower_bound() const noexcept { return lower_bound_; }

 private:
  double variance_ratio_;
  double lower_bound_;
};

/// The run-length CDF did not reach the requested level before the cap.
class SaturationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// No control limit satisfies the design target inside the admissible range.
class InfeasibleTarget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sewma
