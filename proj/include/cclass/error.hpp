#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cclass {

enum class ErrorKind {
  // graph
  CycleDetected,
  UnknownNode,
  DuplicateNode,
  DuplicateEdge,
  SelfLoop,
  OverlappingSets,
  // data
  UnknownColumn,
  MissingColumn,
  MissingValues,
  ContinuousColumn,
  EmptyColumn,
  NonBinary,
  Schema,
  // parsing
  SyntaxError,
  UnknownVariable,
  RowSumViolation,
  MissingCptRow,
  // statistics / estimation
  InvalidArgument,
  InvalidDof,
  EmptyArm,
  EmptyControl,
  LengthMismatch,
  TooFewSamples,
  InvalidK,
  TNotParent,
  // io
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::DuplicateNode: return "DuplicateNode";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::OverlappingSets: return "OverlappingSets";
    case ErrorKind::UnknownColumn: return "UnknownColumn";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::MissingValues: return "MissingValues";
    case ErrorKind::ContinuousColumn: return "ContinuousColumn";
    case ErrorKind::EmptyColumn: return "EmptyColumn";
    case ErrorKind::NonBinary: return "NonBinary";
    case ErrorKind::Schema: return "Schema";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownVariable: return "UnknownVariable";
    case ErrorKind::RowSumViolation: return "RowSumViolation";
    case ErrorKind::MissingCptRow: return "MissingCptRow";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidDof: return "InvalidDof";
    case ErrorKind::EmptyArm: return "EmptyArm";
    case ErrorKind::EmptyControl: return "EmptyControl";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::TNotParent: return "TNotParent";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Library-wide exception. `kind()` is stable and is what callers (and the
/// CLI exit-code mapping) should branch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace cclass
