#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace modnls {

/// Precondition or input-format violation. Maps to CLI exit code 1.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that ran but could not produce a trustworthy result:
/// divergence, lost contraction, boundary-guard violation, non-stabilized
/// refinement. Maps to CLI exit code 2.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(std::string kind, const std::string& what,
                   double time = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), kind_(std::move(kind)), time_(time) {}

  /// Short machine-readable tag, e.g. "diverged", "guard", "no_contraction".
  const std::string& kind() const noexcept { return kind_; }
  /// Time at which the failure was detected, NaN when not time-resolved.
  double time() const noexcept { return time_; }

 private:
  std::string kind_;
  double time_;
};

}  // namespace modnls
