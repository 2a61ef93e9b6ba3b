#include "idci/error.hpp"

namespace idci {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RowCountMismatch: return "RowCountMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DimensionTooHigh: return "DimensionTooHigh";
    case ErrorCode::PredictedDensityUnderflow: return "PredictedDensityUnderflow";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::AbsoluteContinuityViolated: return "AbsoluteContinuityViolated";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::ZeroDensityAtEvalPoint: return "ZeroDensityAtEvalPoint";
    case ErrorCode::NonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::PredictabilityViolated: return "PredictabilityViolated";
    case ErrorCode::MaxEpochsExceeded: return "MaxEpochsExceeded";
    case ErrorCode::EmptyFiber: return "EmptyFiber";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingRequiredField: return "MissingRequiredField";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::NonNumeric: return "NonNumeric";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string message, std::optional<std::size_t> row,
             std::optional<std::size_t> col)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      row_(row),
      col_(col),
      message_(std::move(message)) {}

}  // namespace idci
