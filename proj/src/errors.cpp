#include "mstate/errors.hpp"

namespace mstate {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonTrivialIntersection: return "NonTrivialIntersection";
    case ErrorCode::DegenerateGenerator: return "DegenerateGenerator";
    case ErrorCode::CriticalValue: return "CriticalValue";
    case ErrorCode::WidthTooLarge: return "WidthTooLarge";
    case ErrorCode::BetaTooLarge: return "BetaTooLarge";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotManyBody: return "NotManyBody";
    case ErrorCode::PropertyViolated: return "PropertyViolated";
    case ErrorCode::EigensolverFailure: return "EigensolverFailure";
    case ErrorCode::BelowSigma: return "BelowSigma";
    case ErrorCode::RecursionDepth: return "RecursionDepth";
    case ErrorCode::BoxTooSmall: return "BoxTooSmall";
    case ErrorCode::BoundaryBreach: return "BoundaryBreach";
    case ErrorCode::ToleranceFailure: return "ToleranceFailure";
    case ErrorCode::EmptyFilter: return "EmptyFilter";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::GapNonpositive: return "GapNonpositive";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::OverridePathInvalid: return "OverridePathInvalid";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace mstate
