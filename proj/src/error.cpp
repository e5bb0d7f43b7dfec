#include "vrap/error.hpp"

namespace vrap {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedDocument: return "MalformedDocument";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::EmptyLabel: return "EmptyLabel";
    case ErrorKind::InvalidLabel: return "InvalidLabel";
    case ErrorKind::SelfRelation: return "SelfRelation";
    case ErrorKind::EmptyText: return "EmptyText";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::EmptyStore: return "EmptyStore";
    case ErrorKind::CorruptSnapshot: return "CorruptSnapshot";
    case ErrorKind::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorKind::InvalidQuery: return "InvalidQuery";
    case ErrorKind::EmptyTarget: return "EmptyTarget";
    case ErrorKind::EmptyTagSet: return "EmptyTagSet";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::DivergenceDetected: return "DivergenceDetected";
    case ErrorKind::UnknownImageId: return "UnknownImageId";
    case ErrorKind::DuplicateImageId: return "DuplicateImageId";
    case ErrorKind::ClientError: return "ClientError";
    case ErrorKind::EmptyEvalSet: return "EmptyEvalSet";
    case ErrorKind::EmptyCandidate: return "EmptyCandidate";
    case ErrorKind::EmptyRelevantSet: return "EmptyRelevantSet";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

bool is_input_error(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonFiniteLoss:
    case ErrorKind::DivergenceDetected:
    case ErrorKind::ClientError:
      return false;
    default:
      return true;
  }
}

namespace {

std::string with_location(const std::string& message, std::size_t line, std::size_t column) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

Error::Error(ErrorKind kind, const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(std::string(to_string(kind)) + ": " + with_location(message, line, column)),
      kind_(kind),
      message_(message),
      line_(line),
      column_(column) {}

}  // namespace vrap
