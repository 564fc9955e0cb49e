#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hurricane {

enum class ErrorCode {
  InvalidContext,
  DegenerateGeometry,
  UnknownOperator,
  LengthMismatch,
  IndexOutOfRange,
  ParseError,
  DuplicateKey,
  NonPositiveLatency,
  MissingLatency,
  SingularSystem,
  LayoutMismatch,
  EmptyDataset,
  InfeasibleConstraint,
  EvaluatorFailure,
  UnpreparedEvaluator,
  SpaceTooLarge,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `layer()` is 1-based when set.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<int> layer = std::nullopt)
      : std::runtime_error(message), code_(code), layer_(layer) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<int> layer() const noexcept { return layer_; }

 private:
  ErrorCode code_;
  std::optional<int> layer_;
};

}  // namespace hurricane
