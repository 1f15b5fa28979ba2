#include "sdoc/error.hpp"

namespace sdoc {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownCode: return "UnknownCode";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::ClusterTooSmall: return "ClusterTooSmall";
    case ErrorCode::TooManyShots: return "TooManyShots";
    case ErrorCode::InsufficientDocuments: return "InsufficientDocuments";
    case ErrorCode::BackendError: return "BackendError";
    case ErrorCode::BackendEmptyResponse: return "BackendEmptyResponse";
    case ErrorCode::BackendExhausted: return "BackendExhausted";
    case ErrorCode::ReplayMiss: return "ReplayMiss";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::MissingAnswers: return "MissingAnswers";
    case ErrorCode::MissingRows: return "MissingRows";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::InsufficientDocs: return "InsufficientDocs";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace sdoc
