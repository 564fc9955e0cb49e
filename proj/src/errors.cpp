#include "hurricane/errors.hpp"

namespace hurricane {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidContext: return "InvalidContext";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::UnknownOperator: return "UnknownOperator";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::NonPositiveLatency: return "NonPositiveLatency";
    case ErrorCode::MissingLatency: return "MissingLatency";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InfeasibleConstraint: return "InfeasibleConstraint";
    case ErrorCode::EvaluatorFailure: return "EvaluatorFailure";
    case ErrorCode::UnpreparedEvaluator: return "UnpreparedEvaluator";
    case ErrorCode::SpaceTooLarge: return "SpaceTooLarge";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace hurricane
