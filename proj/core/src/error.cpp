#include "hlift/error.hpp"

namespace hlift {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::TableSizeMismatch: return "TableSizeMismatch";
    case ErrorCode::NonPositivePotential: return "NonPositivePotential";
    case ErrorCode::DanglingVariable: return "DanglingVariable";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::IncompleteAssignment: return "IncompleteAssignment";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::HierarchyMismatch: return "HierarchyMismatch";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::InconsistentEvidence: return "InconsistentEvidence";
    case ErrorCode::StructureMismatch: return "StructureMismatch";
    case ErrorCode::PatternNotLiftable: return "PatternNotLiftable";
    case ErrorCode::EpsOutOfRange: return "EpsOutOfRange";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace hlift
