#pragma once

#include <stdexcept>
#include <string>

namespace dofinetti {

/// Conditioning slice (or a conditional factor's parent context) carries zero
/// probability mass and the uniform fallback is disabled.
class ZeroMassContext : public std::runtime_error {
 public:
  explicit ZeroMassContext(const std::string& what) : std::runtime_error(what) {}
};

/// A query conditions on a value that contradicts an intervention's forced value.
class ConditioningInconsistent : public std::runtime_error {
 public:
  explicit ConditioningInconsistent(const std::string& what) : std::runtime_error(what) {}
};

/// Axes, cardinalities, or table shapes do not line up.
class DimensionMismatch : public std::runtime_error {
 public:
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// A conditional-independence test stratum is too sparse under strict validity.
class InsufficientData : public std::runtime_error {
 public:
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

/// Parent adjustment requires the same variable set intervened at every covered position.
class InconsistentInterventionPattern : public std::runtime_error {
 public:
  explicit InconsistentInterventionPattern(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace dofinetti
