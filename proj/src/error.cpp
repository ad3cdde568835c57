#include "rowtracker/error.hpp"

#include <fmt/format.h>

namespace rowtracker {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::OutOfOrderFrame: return "OutOfOrderFrame";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::CorruptManifest: return "CorruptManifest";
    case ErrorCode::MissingCalibration: return "MissingCalibration";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ZeroGroundTruth: return "ZeroGroundTruth";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

namespace {
std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> frame) {
  if (frame) {
    return fmt::format("{}(frame {}): {}", to_string(code), *frame, message);
  }
  return fmt::format("{}: {}", to_string(code), message);
}
}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> frame)
    : std::runtime_error(decorate(code, message, frame)),
      code_(code),
      frame_(frame) {}

}  // namespace rowtracker
