#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace symtutor {

enum class ErrorCode {
  EmptyTrace,
  UnknownAction,
  EmptyOperand,
  NonDigitOperand,
  InvalidOperand,
  NotRunning,
  UnknownCallable,
  ArityError,
  NonDigitArgument,
  FormatTaskMismatch,
  MixedFormats,
  EmptyExemplars,
  UnparseableQuery,
  Timeout,
  HttpStatus,
  MissingCredential,
  Transport,
  CallBudgetExceeded,
  EmptyRecords,
  Io,
  Config,
  Parse,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the whole library; `code()` carries the category.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

// Raised by parse_trace; offset is the byte offset of the offending token.
class UnknownActionError : public Error {
public:
  UnknownActionError(std::string token, std::size_t offset)
      : Error(ErrorCode::UnknownAction,
              "'" + token + "' at offset " + std::to_string(offset)),
        token_(std::move(token)), offset_(offset) {}

  const std::string& token() const noexcept { return token_; }
  std::size_t offset() const noexcept { return offset_; }

private:
  std::string token_;
  std::size_t offset_;
};

class HttpStatusError : public Error {
public:
  HttpStatusError(int status, const std::string& message)
      : Error(ErrorCode::HttpStatus, message), status_(status) {}
  int status() const noexcept { return status_; }

private:
  int status_;
};

} // namespace symtutor
