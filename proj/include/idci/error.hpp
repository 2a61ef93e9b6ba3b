#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace idci {

enum class ErrorCode {
  RowCountMismatch,
  NonFiniteValue,
  TooFewSamples,
  AllZeroWeights,
  ZeroVarianceColumn,
  DegenerateCovariance,
  DimensionMismatch,
  DimensionTooHigh,
  PredictedDensityUnderflow,
  LengthMismatch,
  AbsoluteContinuityViolated,
  NotNormalized,
  ZeroDensityAtEvalPoint,
  NonPositiveDefinite,
  IndexOutOfRange,
  PredictabilityViolated,
  MaxEpochsExceeded,
  EmptyFiber,
  PreconditionViolated,
  InvalidArgument,
  ParseError,
  MissingRequiredField,
  InvalidValue,
  HeaderMismatch,
  RaggedRow,
  NonNumeric,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Error raised by every idci operation. `row` and `col` carry the
/// offending location when there is one (sample row/column, file line/column,
/// grid cell, evaluation point).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message,
        std::optional<std::size_t> row = std::nullopt,
        std::optional<std::size_t> col = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> row() const noexcept { return row_; }
  std::optional<std::size_t> col() const noexcept { return col_; }
  /// what() without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> row_;
  std::optional<std::size_t> col_;
  std::string message_;
};

}  // namespace idci
