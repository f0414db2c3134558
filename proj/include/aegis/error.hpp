#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aegis {

// Every failure kind the library can surface. Grouped by the module that
// raises it; the names are part of the public contract (CLI and HTTP error
// bodies print them verbatim).
enum class Errc {
  // domain
  InvalidEnum,
  EmptyDescription,
  BadVersionPattern,
  OutOfRange,
  MissingKey,
  WrongThreatCount,
  NestedImpact,
  UnknownCategory,
  // attack-kb
  FileMissing,
  MalformedBundle,
  NotFound,
  InvalidId,
  // intel / llm transport
  Transport,
  RateLimited,
  QuotaExceeded,
  AuthFailed,
  ProviderRefused,
  Timeout,
  // llm
  MissingBinding,
  NoParsableObject,
  SchemaViolation,
  // pipeline
  GenerationFailed,
  NotMermaid,
  Precondition,
  // report
  RenderFailed,
  // evalkit
  EmptyText,
  TooFewSamples,
  NonPositive,
  EmptySample,
  BadInput,
  DimensionMismatch,
  ZeroVector,
  NoComparablePairs,
  DegenerateInput,
  // app-io
  MissingLlmKey,
  SessionExpired,
  IoError,
  SchemaVersionMismatch,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  // Transport-class failures are worth retrying; everything else is final.
  bool retryable() const noexcept {
    return code_ == Errc::Transport || code_ == Errc::Timeout ||
           code_ == Errc::RateLimited;
  }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace aegis
