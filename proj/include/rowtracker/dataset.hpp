#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rowtracker/frame.hpp"

namespace rowtracker {

// On-disk row layout:
//
//   <root>/manifest.txt       key = value: format, frames, camera, calibration[, gt_count]
//   <root>/calibration.txt    see read_calibration
//   <root>/odometry.csv       "frame_index,distance_m", cumulative rail metres
//   <root>/masks/NNNNNN.rle   detections of frame NNNNNN
//   <root>/depth/NNNNNN.depth 16-bit depth of frame NNNNNN

/// Mask as run-length text: "width height count" then `count` alternating
/// background/foreground run lengths over the row-major image, starting
/// with background.
void write_mask_rle(std::ostream& out, const Mask& mask);
Mask read_mask_rle(std::istream& in);

/// Per-frame detection file: "detections K", then per detection a line
/// "detection <confidence> <gt_id>" followed by its RLE mask.
void write_detections(std::ostream& out, const std::vector<Detection>& detections);
std::vector<Detection> read_detections(std::istream& in);

/// Depth file: width and height as little-endian uint32, then width*height
/// little-endian uint16 millimetres, row-major.
void write_depth(std::ostream& out, const DepthImage& depth);
DepthImage read_depth(std::istream& in);

struct Manifest {
  std::size_t frames = 0;
  std::string camera = "cam0";
  std::string calibration = "calibration.txt";
  std::optional<int> gt_count;
};

/// A recorded row on disk. Loading validates the manifest, every frame file,
/// odometry monotonicity and depth dimensions; masks are read lazily.
class RowDataset final : public FrameSource {
 public:
  /// Throws MissingFile, CorruptManifest, MissingCalibration or
  /// DimensionMismatch, naming the frame where one is involved.
  static RowDataset load(const std::filesystem::path& root);

  std::string id() const override { return id_; }
  std::size_t size() const override { return manifest_.frames; }
  FrameRecord frame(std::size_t index) const override;
  const Calibration& calibration() const override { return calibration_; }
  std::optional<int> gt_count() const override { return manifest_.gt_count; }

  const std::filesystem::path& root() const { return root_; }
  const Manifest& manifest() const { return manifest_; }
  const std::vector<double>& odometry() const { return odometry_; }

 private:
  std::filesystem::path root_;
  std::string id_;
  Manifest manifest_;
  Calibration calibration_;
  std::vector<double> odometry_;
};

RowDataset load_dataset(const std::filesystem::path& root);

/// Writes every frame of `row` under `root`, replacing any previous content
/// in one rename once the new dataset is complete.
void write_dataset(const std::filesystem::path& root, const FrameSource& row,
                   const std::string& camera = "cam0");

}  // namespace rowtracker
