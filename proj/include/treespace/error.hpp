#pragma once

#include <stdexcept>
#include <string>

namespace treespace {

enum class ErrorCode {
  RootHasNoParent,
  MissingRoot,
  OrphanNode,
  LevelCapExceeded,
  NonFiniteAttribute,
  ArityMismatch,
  NotInSupport,
  InvalidWeights,
  NotSubtree,
  ZeroDirection,
  DegenerateSample,
  SyntaxError,
  DuplicateId,
  UnknownNode,
  UnknownId,
  InvalidSpec,
};

const char* error_code_name(ErrorCode code);

/// All library failures are reported through this exception. The code tells
/// callers (notably the CLI) which class of failure occurred; the message
/// carries the location details.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const { return code_; }

  /// The message without the code-name prefix, for rewrapping with
  /// location context.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace treespace
