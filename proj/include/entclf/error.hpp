#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace entclf {

enum class ErrorCode {
  // taxonomy / dataset
  MalformedCode,
  UnknownCategory,
  UnknownCode,
  ParseError,
  LabelMismatch,
  DuplicateEntity,
  BadRatios,
  // acquisition
  HttpError,
  AuthError,
  MalformedResponse,
  EmptyCompletion,
  MixedEntities,
  CacheCorrupt,
  // corpus
  MissingText,
  MissingGold,
  IoError,
  // classify
  EmptyTrainingSet,
  UnknownLabel,
  JobFailed,
  ModelMismatch,
  // eval
  LengthMismatch,
  UnknownGold,
  MissingConfidence,
  InsufficientSnippets,
  SchemeMismatch,
  // general
  ConfigError,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedCode: return "MalformedCode";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::UnknownCode: return "UnknownCode";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::DuplicateEntity: return "DuplicateEntity";
    case ErrorCode::BadRatios: return "BadRatios";
    case ErrorCode::HttpError: return "HttpError";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::EmptyCompletion: return "EmptyCompletion";
    case ErrorCode::MixedEntities: return "MixedEntities";
    case ErrorCode::CacheCorrupt: return "CacheCorrupt";
    case ErrorCode::MissingText: return "MissingText";
    case ErrorCode::MissingGold: return "MissingGold";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::JobFailed: return "JobFailed";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnknownGold: return "UnknownGold";
    case ErrorCode::MissingConfidence: return "MissingConfidence";
    case ErrorCode::InsufficientSnippets: return "InsufficientSnippets";
    case ErrorCode::SchemeMismatch: return "SchemeMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code, so
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Process exit status for a failure: 2 config, 3 network, 4 data.
constexpr int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::BadRatios:
      return 2;
    case ErrorCode::HttpError:
    case ErrorCode::AuthError:
    case ErrorCode::MalformedResponse:
    case ErrorCode::EmptyCompletion:
    case ErrorCode::JobFailed:
      return 3;
    default:
      return 4;
  }
}

}  // namespace entclf
