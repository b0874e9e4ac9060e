#include "sdfkit/error.hpp"

namespace sdfkit {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::NonPositiveProbability: return "NonPositiveProbability";
    case ErrorCode::ProbabilityNotNormalized: return "ProbabilityNotNormalized";
    case ErrorCode::NonPositiveBaseline: return "NonPositiveBaseline";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::InvalidUtility: return "InvalidUtility";
    case ErrorCode::SingularCovariation: return "SingularCovariation";
    case ErrorCode::KappaNotInKernel: return "KappaNotInKernel";
    case ErrorCode::InvalidStepCount: return "InvalidStepCount";
    case ErrorCode::InvalidPathCount: return "InvalidPathCount";
    case ErrorCode::InsufficientPaths: return "InsufficientPaths";
    case ErrorCode::BaselineNotConstantRate: return "BaselineNotConstantRate";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::ArbitrageDetected: return "ArbitrageDetected";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorCode::LpNumericalFailure: return "LpNumericalFailure";
    case ErrorCode::InternalInconsistency: return "InternalInconsistency";
  }
  return "Unknown";
}

}  // namespace sdfkit
