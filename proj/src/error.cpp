#include "psibpmn/error.hpp"

namespace psibpmn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownReference: return "UnknownReference";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::NotEnabled: return "NotEnabled";
    case ErrorCode::TargetNotPerformed: return "TargetNotPerformed";
    case ErrorCode::NoPendingRevocation: return "NoPendingRevocation";
    case ErrorCode::WrongDecider: return "WrongDecider";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::LintFailed: return "LintFailed";
    case ErrorCode::XmlSyntaxError: return "XmlSyntaxError";
    case ErrorCode::NotBpmn: return "NotBpmn";
    case ErrorCode::UnknownAnnotationKey: return "UnknownAnnotationKey";
    case ErrorCode::StateSpaceLimitExceeded: return "StateSpaceLimitExceeded";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace psibpmn
