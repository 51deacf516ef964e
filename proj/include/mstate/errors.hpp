#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mstate {

enum class ErrorCode {
  NonTrivialIntersection,
  DegenerateGenerator,
  CriticalValue,
  WidthTooLarge,
  BetaTooLarge,
  SpecInvalid,
  ShapeMismatch,
  NotManyBody,
  PropertyViolated,
  EigensolverFailure,
  BelowSigma,
  RecursionDepth,
  BoxTooSmall,
  BoundaryBreach,
  ToleranceFailure,
  EmptyFilter,
  WindowTooShort,
  GapNonpositive,
  UnknownScenario,
  OverridePathInvalid,
  IoFailure,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Every failure path named in the public API throws
/// this with the matching code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mstate
