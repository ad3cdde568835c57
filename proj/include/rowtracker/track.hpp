#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rowtracker/frame.hpp"

namespace rowtracker {

/// Tracker variants: plain mask IoU (bl), IoU against odometry re-projected
/// tracklet masks (rp), and re-projection plus depth filtering (df).
enum class Variant { Baseline, Reprojection, DepthFiltered };

std::string_view to_string(Variant v);
/// Accepts "bl", "rp" and "df".
Variant parse_variant(std::string_view text);

struct FilterConfig {
  double d_crop_min = 0.2;  // m
  double d_crop_max = 1.4;  // m
  double tau_dpt = 0.5;

  void validate() const;
};

/// Image side on which fruits enter the view; the start zone lies on this
/// side and the stop zone on the opposite one.
enum class EntrySide { Right, Left };

struct TrackerConfig {
  Variant variant = Variant::DepthFiltered;
  double iou_threshold = 0.3;
  int max_misses = 10;
  int min_hits = 5;
  double start_zone = 0.1;  // fraction of image width
  double stop_zone = 0.1;
  double confidence_floor = 0.0;
  EntrySide entry_side = EntrySide::Right;
  FilterConfig filter;

  void validate() const;
};

TrackerConfig parse_tracker_config(std::istream& in, const std::string& source = "tracker config");
TrackerConfig read_tracker_config(const std::filesystem::path& path);
void write_tracker_config(std::ostream& out, const TrackerConfig& cfg);

/// True iff the share of mask pixels whose depth lies in
/// [d_crop_min, d_crop_max] is strictly greater than tau_dpt. Pixels without
/// depth count in the denominator only.
bool depth_retain(const Mask& mask, const DepthImage& depth, const FilterConfig& cfg);

struct Match {
  std::size_t tracklet;
  std::size_t detection;
  double iou;
};

/// Greedy association: pairs are visited by descending IoU (ties: lower
/// tracklet index, then lower detection index) and accepted when IoU reaches
/// the threshold and both sides are still free.
std::vector<Match> associate(std::span<const Mask> tracklets, std::span<const Mask> detections,
                             double iou_threshold);

struct Tracklet {
  int id = 0;
  Mask last_mask;
  std::size_t last_frame = 0;
  std::size_t born_frame = 0;
  int miss_count = 0;
  int hit_count = 1;
  bool born_in_start_zone = false;
  /// Identity of the detection that spawned the tracklet (simulated data).
  int spawn_gt_id = -1;
  /// Camera-frame surface points behind last_mask; empty for bl and after
  /// retirement.
  std::vector<Eigen::Vector3f> points;
};

struct TrackerState {
  std::vector<Tracklet> active;  // ascending id
  std::vector<Tracklet> retired;
  int next_id = 0;
  std::optional<std::size_t> frame_cursor;
  double last_odometry = 0.0;
};

/// Advances the tracker by one frame. Throws OutOfOrderFrame unless frames
/// arrive as 0, 1, 2, ... and DimensionMismatch for images that disagree
/// with the calibration.
void step(TrackerState& state, const FrameRecord& frame, const TrackerConfig& cfg,
          const Calibration& calib);

/// Tracklets (active and retired) with at least min_hits hits that were
/// not born in the start zone.
int finalize(const TrackerState& state, const TrackerConfig& cfg);

/// Stateful convenience wrapper around step/finalize.
class Tracker {
 public:
  Tracker(TrackerConfig cfg, Calibration calib);

  void step(const FrameRecord& frame) { rowtracker::step(state_, frame, cfg_, calib_); }
  int count() const { return finalize(state_, cfg_); }

  const TrackerState& state() const { return state_; }
  const TrackerConfig& config() const { return cfg_; }

 private:
  TrackerConfig cfg_;
  Calibration calib_;
  TrackerState state_;
};

/// Runs one tracker over every frame of a row and returns the count.
int count_row(const FrameSource& row, const TrackerConfig& cfg);

}  // namespace rowtracker
