#pragma once

#include <stdexcept>
#include <string>

namespace sdoc {

// Every failure the toolkit can raise, named so tests can match on the
// condition instead of parsing message text.
enum class ErrorCode {
  InvalidArgument,
  UnknownCode,
  KTooLarge,
  DegenerateInput,
  ClusterTooSmall,
  TooManyShots,
  InsufficientDocuments,
  BackendError,
  BackendEmptyResponse,
  BackendExhausted,
  ReplayMiss,
  SchemaError,
  DuplicateId,
  BadLabel,
  MissingAnswers,
  MissingRows,
  KeyMismatch,
  InsufficientDocs,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace sdoc
