#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace psibpmn {

enum class ErrorCode {
  SyntaxError,
  UnknownReference,
  DuplicateId,
  CycleDetected,
  NotEnabled,
  TargetNotPerformed,
  NoPendingRevocation,
  WrongDecider,
  ValidationFailed,
  LintFailed,
  XmlSyntaxError,
  NotBpmn,
  UnknownAnnotationKey,
  StateSpaceLimitExceeded,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace psibpmn
