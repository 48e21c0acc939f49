#include "alvq/error.hpp"

namespace alvq {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateVector: return "DegenerateVector";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::MissingNotSupported: return "MissingNotSupported";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::RankUnsupported: return "RankUnsupported";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::RankUnsupported:
      return 2;
    case ErrorCode::NonFinite:
    case ErrorCode::DegenerateVector:
    case ErrorCode::ZeroDenominator:
      return 4;
    default:
      return 3;
  }
}

}  // namespace alvq
