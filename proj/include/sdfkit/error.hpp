#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdfkit {

// Numeric values are part of the CLI contract and must not be renumbered.
// Codes below 100 are input errors, 100 and above are domain/numerical errors.
enum class ErrorCode : int {
  InvalidArgument = 10,
  ParseError = 11,
  IoFailure = 12,
  NonPositiveProbability = 20,
  ProbabilityNotNormalized = 21,
  NonPositiveBaseline = 22,
  DimensionMismatch = 23,
  DomainViolation = 24,
  InvalidUtility = 25,
  SingularCovariation = 30,
  KappaNotInKernel = 31,
  InvalidStepCount = 32,
  InvalidPathCount = 33,
  InsufficientPaths = 34,
  BaselineNotConstantRate = 35,
  InvalidModel = 36,
  ArbitrageDetected = 100,
  Infeasible = 101,
  MaxIterationsExceeded = 102,
  LpNumericalFailure = 103,
  InternalInconsistency = 104,
};

std::string_view error_name(ErrorCode code);

inline bool is_input_error(ErrorCode code) { return static_cast<int>(code) < 100; }

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sdfkit
