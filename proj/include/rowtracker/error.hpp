#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rowtracker {

enum class ErrorCode {
  NonPositiveDepth,
  DimensionMismatch,
  EmptyMask,
  OutOfOrderFrame,
  InvalidSpec,
  InvalidConfig,
  MissingFile,
  CorruptManifest,
  MissingCalibration,
  IoFailure,
  ZeroGroundTruth,
  EmptyInput,
  DegenerateInput,
  UsageError,
};

std::string_view to_string(ErrorCode code);

/// Exception type thrown by every rowtracker operation. Dataset errors carry
/// the index of the offending frame.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> frame = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> frame() const noexcept { return frame_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> frame_;
};

}  // namespace rowtracker
