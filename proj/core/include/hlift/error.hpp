#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hlift {

enum class ErrorCode {
  DuplicateName,
  TableSizeMismatch,
  NonPositivePotential,
  DanglingVariable,
  UnknownVariable,
  IncompleteAssignment,
  MissingValue,
  LengthMismatch,
  LevelOutOfRange,
  HierarchyMismatch,
  EmptyGroup,
  StateSpaceTooLarge,
  InconsistentEvidence,
  StructureMismatch,
  PatternNotLiftable,
  EpsOutOfRange,
  SchemaError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. The message always names the
/// offending entity (variable, factor, level, ...) when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hlift
