#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace docsimp {

enum class ErrorCode {
  invalid_argument,
  non_alphabetic_word,
  transport,
  timeout,
  provider,
  replay_miss,
  unknown_template,
  missing_binding,
  extra_binding,
  template_format,
  empty_bank,
  cot_generation,
  missing_unit_text,
  empty_references,
  no_verdicts,
  manifest,
  io,
  config,
};

std::string_view to_string(ErrorCode code) noexcept;

// Base exception for everything the library throws on purpose. Callers that
// need to branch on the failure kind inspect code() rather than catching
// derived types.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Non-2xx answer from a chat or embedding endpoint.
class ProviderError : public Error {
 public:
  ProviderError(int status, const std::string& message)
      : Error(ErrorCode::provider, message), status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace docsimp
