#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rowtracker/geom.hpp"
#include "rowtracker/image.hpp"

namespace rowtracker {

/// One instance-segmentation detection.
struct Detection {
  Mask mask;
  double confidence = 1.0;
  /// True fruit identity; only simulated data carries one, -1 otherwise.
  int gt_id = -1;

  bool operator==(const Detection&) const = default;
};

/// Synchronized per-frame inputs: detections, registered depth and the
/// cumulative rail odometry.
struct FrameRecord {
  std::size_t frame_index = 0;
  double odometry_distance = 0.0;
  std::vector<Detection> detections;
  DepthImage depth;

  bool operator==(const FrameRecord&) const = default;
};

/// Ordered, random-access source of frames for one crop row.
class FrameSource {
 public:
  virtual ~FrameSource() = default;

  virtual std::string id() const = 0;
  virtual std::size_t size() const = 0;
  virtual FrameRecord frame(std::size_t index) const = 0;
  virtual const Calibration& calibration() const = 0;
  /// Annotated fruit count of the surveyed row, when known.
  virtual std::optional<int> gt_count() const = 0;
};

/// Frames held in memory.
class InMemoryRow final : public FrameSource {
 public:
  InMemoryRow(std::string id, Calibration calibration, std::vector<FrameRecord> frames,
              std::optional<int> gt_count = std::nullopt)
      : id_(std::move(id)),
        calibration_(std::move(calibration)),
        frames_(std::move(frames)),
        gt_count_(gt_count) {}

  std::string id() const override { return id_; }
  std::size_t size() const override { return frames_.size(); }
  FrameRecord frame(std::size_t index) const override { return frames_.at(index); }
  const Calibration& calibration() const override { return calibration_; }
  std::optional<int> gt_count() const override { return gt_count_; }

  const std::vector<FrameRecord>& frames() const { return frames_; }

 private:
  std::string id_;
  Calibration calibration_;
  std::vector<FrameRecord> frames_;
  std::optional<int> gt_count_;
};

}  // namespace rowtracker
