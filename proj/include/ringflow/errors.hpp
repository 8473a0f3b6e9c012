#pragma once

#include <stdexcept>
#include <string>

namespace ringflow {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Physical or structural parameter violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Linearization requested at a point where the spacing sensitivity vanishes.
class DegenerateLinearizationError : public Error {
 public:
  using Error::Error;
};

/// Equilibrium layout does not fit on the ring (CAV spacing would be <= 0).
class InfeasibleEquilibriumError : public Error {
 public:
  using Error::Error;
};

/// Communication topology is malformed (e.g. CAV cannot see itself).
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// The convex restriction of the structured synthesis problem is infeasible.
class StructuredInfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Requested equilibrium velocity is not reachable on this ring.
class ReachabilityError : public Error {
 public:
  using Error::Error;
};

/// A transfer function has no finite H2 norm.
class UnboundedNormError : public Error {
 public:
  using Error::Error;
};

/// Matrix spectrum violates a precondition (e.g. not Hurwitz).
class SpectrumError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical procedure failed to converge.
class NumericalFailureError : public Error {
 public:
  using Error::Error;
};

/// Configuration document could not be parsed or validated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ringflow
