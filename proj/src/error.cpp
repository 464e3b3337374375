#include "lhflow/error.hpp"

namespace lhflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorCode::EmptyPointSet: return "EmptyPointSet";
    case ErrorCode::TooFewParticles: return "TooFewParticles";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::StepBoundViolation: return "StepBoundViolation";
    case ErrorCode::ResidualBreach: return "ResidualBreach";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace lhflow
