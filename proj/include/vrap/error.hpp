#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vrap {

enum class ErrorKind {
  // scene_model
  MalformedDocument,
  DanglingReference,
  EmptyLabel,
  InvalidLabel,
  SelfRelation,
  // retrieval
  EmptyText,
  DimensionMismatch,
  ZeroVector,
  EmptyStore,
  CorruptSnapshot,
  // prompting
  BudgetTooSmall,
  InvalidQuery,
  // losses
  EmptyTarget,
  EmptyTagSet,
  NonFiniteLoss,
  DivergenceDetected,
  // inference
  UnknownImageId,
  DuplicateImageId,
  ClientError,
  // evalbench
  EmptyEvalSet,
  EmptyCandidate,
  EmptyRelevantSet,
  // cli / shared
  ConfigInvalid,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Errors caused by bad input (as opposed to a broken invariant inside the
/// library). The CLI maps these to exit status 1.
bool is_input_error(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  /// Location-carrying form used by document parsers. `line` is 1-based,
  /// `column` is the 1-based byte offset within the line.
  Error(ErrorKind kind, const std::string& message, std::size_t line, std::size_t column);

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  /// The message as passed in, without kind or location prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
  std::size_t line_ = 0;
  std::size_t column_ = 0;
};

}  // namespace vrap
