#pragma once

#include <stdexcept>
#include <string>

namespace geomcmp {

/// Input outside the mathematical domain of an operation. The message names
/// the violated hypothesis.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A requested target value lies at or below an infimum that is approached
/// but never attained, so no finite preimage exists.
class InfimumNotAttained : public std::runtime_error {
 public:
  explicit InfimumNotAttained(const std::string& what)
      : std::runtime_error(what) {}
};

/// Halving the integrator step moved the monitored quantity by more than the
/// accepted Richardson tolerance.
class StepTooCoarse : public std::runtime_error {
 public:
  explicit StepTooCoarse(const std::string& what) : std::runtime_error(what) {}
};

/// A curvature field sample failed the symmetry requirement.
class NonSymmetricField : public std::runtime_error {
 public:
  explicit NonSymmetricField(const std::string& what)
      : std::runtime_error(what) {}
};

/// Refining the quadrature grid changed the integral beyond tolerance.
class QuadratureUnresolved : public std::runtime_error {
 public:
  explicit QuadratureUnresolved(const std::string& what)
      : std::runtime_error(what) {}
};

/// An operation that requires the trajectory to be nonsingular on (0, l] was
/// asked to cross a focal point.
class FocalPointInRange : public std::runtime_error {
 public:
  explicit FocalPointInRange(const std::string& what)
      : std::runtime_error(what) {}
};

/// Sampled data violates a curvature or convexity hypothesis, so the
/// conclusion of the comparison is not asserted.
class HypothesisViolated : public std::runtime_error {
 public:
  explicit HypothesisViolated(const std::string& what)
      : std::runtime_error(what) {}
};

/// The finite-difference grid is too coarse for the requested eigenvalue
/// accuracy.
class GridTooCoarse : public std::runtime_error {
 public:
  explicit GridTooCoarse(const std::string& what) : std::runtime_error(what) {}
};

/// A root bracket contained no sign change.
class BracketFailure : public std::runtime_error {
 public:
  explicit BracketFailure(const std::string& what)
      : std::runtime_error(what) {}
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace geomcmp
