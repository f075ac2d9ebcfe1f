#pragma once

#include <stdexcept>
#include <string>

namespace secgate {

// Every failure raised by the library carries one of these codes so the
// C API and the HTTP layer can map it without string matching.
enum class ErrorCode {
  InvalidArgument,
  BackendUnavailable,  // transport failure talking to an LLM endpoint
  BackendAuth,
  BackendUpstream,
  MalformedReply,
  DuplicateDimension,
  MissingDimension,
  EmptyCorpus,
  DuplicateForm,
  EmptyForm,
  ShrinkNotSupported,
  NonFiniteLoss,
  Io,
  Malformed,
  DuplicateId,
  CorpusTooSmall,
  AlreadyAnswered,
  OutOfRange,
  StrategyMismatch,
  PlaceholderCount,
  NotFound,
  Corrupt,
  ConfigInvalid,
  BindFailure,
  Rejected,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Upstream HTTP failures keep the status and body for diagnostics.
class UpstreamError : public Error {
 public:
  UpstreamError(int status, std::string body)
      : Error(ErrorCode::BackendUpstream,
              "upstream returned HTTP " + std::to_string(status)),
        status_(status),
        body_(std::move(body)) {}

  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

// Line-numbered parse failure in JSON-lines inputs (1-based).
class MalformedLineError : public Error {
 public:
  MalformedLineError(std::size_t line, const std::string& why)
      : Error(ErrorCode::Malformed,
              "line " + std::to_string(line) + ": " + why),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NonFiniteLossError : public Error {
 public:
  explicit NonFiniteLossError(std::size_t step)
      : Error(ErrorCode::NonFiniteLoss,
              "non-finite loss at step " + std::to_string(step)),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class CorruptError : public Error {
 public:
  CorruptError(std::size_t offset, const std::string& why)
      : Error(ErrorCode::Corrupt,
              "corrupt data at byte " + std::to_string(offset) + ": " + why),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace secgate
