#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace alvq {

enum class ErrorCode {
  DegenerateVector,
  EmptyMask,
  MissingNotSupported,
  EmptyClass,
  ZeroDenominator,
  NonFinite,
  FormatError,
  TooFewSamples,
  ClassTooSmall,
  RankUnsupported,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Process exit status for the CLI: 2 usage, 3 data, 4 numeric.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace alvq
