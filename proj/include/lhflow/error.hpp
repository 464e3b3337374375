#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lhflow {

enum class ErrorCode {
  NotPositiveDefinite,
  NotSymmetric,
  DimensionMismatch,
  InvalidArgument,
  LambdaOutOfRange,
  EmptyPointSet,
  TooFewParticles,
  NonFiniteState,
  StepBoundViolation,
  ResidualBreach,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable error code. Every failure raised by
/// the library is an Error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Integration failure at a specific pseudo-time.
class NumericalError : public Error {
 public:
  NumericalError(ErrorCode code, double lambda, const std::string& what)
      : Error(code, what + " (lambda=" + std::to_string(lambda) + ")"), lambda_(lambda) {}

  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

}  // namespace lhflow
