#include "rowtracker/track.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rowtracker/config.hpp"
#include "rowtracker/error.hpp"

namespace rowtracker {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Baseline: return "bl";
    case Variant::Reprojection: return "rp";
    case Variant::DepthFiltered: return "df";
  }
  return "?";
}

Variant parse_variant(std::string_view text) {
  if (text == "bl") return Variant::Baseline;
  if (text == "rp") return Variant::Reprojection;
  if (text == "df") return Variant::DepthFiltered;
  throw Error(ErrorCode::InvalidConfig, fmt::format("unknown tracker variant '{}'", text));
}

void FilterConfig::validate() const {
  if (!(d_crop_min > 0.0 && d_crop_min < d_crop_max)) {
    throw Error(ErrorCode::InvalidConfig, "depth range needs 0 < d_crop_min < d_crop_max");
  }
  if (!(tau_dpt >= 0.0 && tau_dpt <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "tau_dpt must lie in [0, 1]");
  }
}

void TrackerConfig::validate() const {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "iou_threshold must lie in [0, 1]");
  }
  if (max_misses < 0) throw Error(ErrorCode::InvalidConfig, "max_misses must be >= 0");
  if (min_hits < 1) throw Error(ErrorCode::InvalidConfig, "min_hits must be >= 1");
  if (!(start_zone >= 0.0 && start_zone < 0.5) || !(stop_zone >= 0.0 && stop_zone < 0.5)) {
    throw Error(ErrorCode::InvalidConfig, "zones must lie in [0, 0.5)");
  }
  if (!(confidence_floor >= 0.0 && confidence_floor <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "confidence_floor must lie in [0, 1]");
  }
  filter.validate();
}

TrackerConfig parse_tracker_config(std::istream& in, const std::string& source) {
  const KeyValues kv = KeyValues::parse(in, source);
  TrackerConfig cfg;
  if (kv.has("variant")) cfg.variant = parse_variant(kv.text("variant"));
  if (kv.has("iou_threshold")) cfg.iou_threshold = kv.number("iou_threshold");
  if (kv.has("max_misses")) cfg.max_misses = kv.integer("max_misses");
  if (kv.has("min_hits")) cfg.min_hits = kv.integer("min_hits");
  if (kv.has("start_zone")) cfg.start_zone = kv.number("start_zone");
  if (kv.has("stop_zone")) cfg.stop_zone = kv.number("stop_zone");
  if (kv.has("confidence_floor")) cfg.confidence_floor = kv.number("confidence_floor");
  if (kv.has("tau_dpt")) cfg.filter.tau_dpt = kv.number("tau_dpt");
  if (kv.has("d_crop_min")) cfg.filter.d_crop_min = kv.number("d_crop_min");
  if (kv.has("d_crop_max")) cfg.filter.d_crop_max = kv.number("d_crop_max");
  if (kv.has("entry_side")) {
    const std::string& side = kv.text("entry_side");
    if (side == "right") {
      cfg.entry_side = EntrySide::Right;
    } else if (side == "left") {
      cfg.entry_side = EntrySide::Left;
    } else {
      throw Error(ErrorCode::InvalidConfig, fmt::format("entry_side must be left or right"));
    }
  }
  cfg.validate();
  return cfg;
}

TrackerConfig read_tracker_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, fmt::format("cannot open {}", path.string()));
  return parse_tracker_config(in, path.string());
}

void write_tracker_config(std::ostream& out, const TrackerConfig& cfg) {
  out << "variant = " << to_string(cfg.variant) << '\n'
      << "iou_threshold = " << format_exact(cfg.iou_threshold) << '\n'
      << "max_misses = " << cfg.max_misses << '\n'
      << "min_hits = " << cfg.min_hits << '\n'
      << "start_zone = " << format_exact(cfg.start_zone) << '\n'
      << "stop_zone = " << format_exact(cfg.stop_zone) << '\n'
      << "tau_dpt = " << format_exact(cfg.filter.tau_dpt) << '\n'
      << "d_crop_min = " << format_exact(cfg.filter.d_crop_min) << '\n'
      << "d_crop_max = " << format_exact(cfg.filter.d_crop_max) << '\n'
      << "confidence_floor = " << format_exact(cfg.confidence_floor) << '\n'
      << "entry_side = " << (cfg.entry_side == EntrySide::Right ? "right" : "left") << '\n';
}

bool depth_retain(const Mask& mask, const DepthImage& depth, const FilterConfig& cfg) {
  if (mask.width() != depth.width() || mask.height() != depth.height()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("mask {}x{} vs depth {}x{}", mask.width(), mask.height(),
                            depth.width(), depth.height()));
  }
  if (mask.empty()) throw Error(ErrorCode::EmptyMask, "depth filter on an empty mask");
  std::size_t in_range = 0;
  mask.for_each([&](int u, int v) {
    if (!depth.valid(u, v)) return;
    const double d = depth.meters(u, v);
    in_range += static_cast<std::size_t>(d >= cfg.d_crop_min && d <= cfg.d_crop_max);
  });
  // Strict inequality, evaluated without dividing.
  return static_cast<double>(in_range) > cfg.tau_dpt * static_cast<double>(mask.count());
}

std::vector<Match> associate(std::span<const Mask> tracklets, std::span<const Mask> detections,
                             double iou_threshold) {
  std::vector<Match> pairs;
  for (std::size_t t = 0; t < tracklets.size(); ++t) {
    for (std::size_t d = 0; d < detections.size(); ++d) {
      if (tracklets[t].roi().intersect(detections[d].roi()).empty()) {
        // No overlap; only matters for a zero threshold.
        if (iou_threshold <= 0.0) pairs.push_back({t, d, 0.0});
        continue;
      }
      const double iou = mask_iou(tracklets[t], detections[d]);
      if (iou >= iou_threshold) pairs.push_back({t, d, iou});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Match& a, const Match& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.tracklet != b.tracklet) return a.tracklet < b.tracklet;
    return a.detection < b.detection;
  });
  std::vector<bool> used_t(tracklets.size(), false), used_d(detections.size(), false);
  std::vector<Match> accepted;
  for (const Match& m : pairs) {
    if (used_t[m.tracklet] || used_d[m.detection]) continue;
    used_t[m.tracklet] = used_d[m.detection] = true;
    accepted.push_back(m);
  }
  return accepted;
}

namespace {

std::vector<Eigen::Vector3f> surface_points(const Mask& mask, const DepthImage& depth,
                                            const Intrinsics& K) {
  std::vector<Eigen::Vector3f> pts;
  pts.reserve(mask.count());
  const double ifx = 1.0 / K.fx, ify = 1.0 / K.fy;
  const Roi& r = mask.roi();
  const auto bits = mask.bits();
  const auto mm = depth.data();
  for (int v = r.y0; v < r.y1; ++v) {
    const std::uint8_t* row = bits.data() + static_cast<std::size_t>(v - r.y0) * r.width();
    const std::uint16_t* drow = mm.data() + static_cast<std::size_t>(v) * depth.width();
    const double y = (v - K.cy) * ify;
    for (int u = r.x0; u < r.x1; ++u) {
      if (!row[u - r.x0] || drow[u] == 0) continue;
      const double d = drow[u] / 1000.0;
      pts.emplace_back(static_cast<float>((u - K.cx) * d * ifx), static_cast<float>(y * d),
                       static_cast<float>(d));
    }
  }
  return pts;
}

struct Zones {
  double start_lo, start_hi, stop_lo, stop_hi;

  Zones(const TrackerConfig& cfg, int width) {
    const double w = width;
    if (cfg.entry_side == EntrySide::Right) {
      start_lo = (1.0 - cfg.start_zone) * w;
      start_hi = w;
      stop_lo = 0.0;
      stop_hi = cfg.stop_zone * w;
    } else {
      start_lo = 0.0;
      start_hi = cfg.start_zone * w;
      stop_lo = (1.0 - cfg.stop_zone) * w;
      stop_hi = w;
    }
  }
  bool in_start(double u) const { return u >= start_lo && u < start_hi; }
  bool in_stop(double u) const { return u >= stop_lo && u < stop_hi; }
};

void check_dimensions(const FrameRecord& frame, const Intrinsics& K) {
  if (frame.depth.width() != K.width || frame.depth.height() != K.height) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("depth is {}x{}, camera is {}x{}", frame.depth.width(),
                            frame.depth.height(), K.width, K.height),
                frame.frame_index);
  }
  for (const Detection& det : frame.detections) {
    if (det.mask.width() != K.width || det.mask.height() != K.height) {
      throw Error(ErrorCode::DimensionMismatch,
                  fmt::format("mask is {}x{}, camera is {}x{}", det.mask.width(),
                              det.mask.height(), K.width, K.height),
                  frame.frame_index);
    }
  }
}

void retire(TrackerState& state, std::size_t index) {
  Tracklet t = std::move(state.active[index]);
  t.points.clear();
  t.points.shrink_to_fit();
  state.retired.push_back(std::move(t));
  state.active.erase(state.active.begin() + static_cast<std::ptrdiff_t>(index));
}

}  // namespace

void step(TrackerState& state, const FrameRecord& frame, const TrackerConfig& cfg,
          const Calibration& calib) {
  const std::size_t expected = state.frame_cursor ? *state.frame_cursor + 1 : 0;
  if (frame.frame_index != expected) {
    throw Error(ErrorCode::OutOfOrderFrame,
                fmt::format("expected frame {}, got {}", expected, frame.frame_index),
                frame.frame_index);
  }
  const Intrinsics& K = calib.intrinsics;
  check_dimensions(frame, K);
  const bool reprojects = cfg.variant != Variant::Baseline;
  const Zones zones(cfg, K.width);

  // Candidate detections.
  std::vector<std::size_t> candidates;
  std::vector<Mask> candidate_masks;
  for (std::size_t i = 0; i < frame.detections.size(); ++i) {
    const Detection& det = frame.detections[i];
    if (det.mask.empty() || det.confidence < cfg.confidence_floor) continue;
    if (cfg.variant == Variant::DepthFiltered && !depth_retain(det.mask, frame.depth, cfg.filter)) {
      continue;
    }
    candidates.push_back(i);
    candidate_masks.push_back(det.mask);
  }

  // Bring every active tracklet into the current frame.
  if (reprojects && state.frame_cursor && frame.odometry_distance != state.last_odometry) {
    const Transform motion = camera_motion(
        rail_motion(state.last_odometry, frame.odometry_distance), calib.camera_extrinsics);
    const Eigen::Matrix3f r = motion.rotation().cast<float>();
    const Eigen::Vector3f t = motion.translation().cast<float>();
    for (Tracklet& tr : state.active) {
      if (tr.points.empty()) continue;
      for (Eigen::Vector3f& p : tr.points) p = r * p + t;
      tr.last_mask = rasterize_points(tr.points, K);
    }
  }

  std::vector<Mask> predicted;
  predicted.reserve(state.active.size());
  for (const Tracklet& tr : state.active) predicted.push_back(tr.last_mask);

  const std::vector<Match> matches = associate(predicted, candidate_masks, cfg.iou_threshold);

  std::vector<bool> tracklet_matched(state.active.size(), false);
  std::vector<bool> detection_matched(candidates.size(), false);
  for (const Match& m : matches) {
    tracklet_matched[m.tracklet] = true;
    detection_matched[m.detection] = true;
    Tracklet& tr = state.active[m.tracklet];
    const Detection& det = frame.detections[candidates[m.detection]];
    tr.last_mask = det.mask;
    tr.last_frame = frame.frame_index;
    tr.miss_count = 0;
    ++tr.hit_count;
    if (reprojects) tr.points = surface_points(det.mask, frame.depth, K);
    if (tr.born_in_start_zone && !zones.in_start(det.mask.centroid().first)) {
      // Hits collected inside the start zone do not count towards min_hits.
      tr.born_in_start_zone = false;
      tr.hit_count = 1;
    }
  }

  // Misses, then the stop zone. Iterate backwards so erasing keeps indices valid.
  for (std::size_t i = state.active.size(); i-- > 0;) {
    Tracklet& tr = state.active[i];
    if (!tracklet_matched[i]) ++tr.miss_count;
    const bool timed_out = tr.miss_count > cfg.max_misses;
    const bool vanished = tr.last_mask.empty();
    const bool leaving = !vanished && zones.in_stop(tr.last_mask.centroid().first);
    if (timed_out || vanished || leaving) {
      spdlog::debug("frame {}: retire tracklet {} (hits {}, misses {})", frame.frame_index, tr.id,
                    tr.hit_count, tr.miss_count);
      retire(state, i);
    }
  }

  for (std::size_t d = 0; d < candidates.size(); ++d) {
    if (detection_matched[d]) continue;
    const Detection& det = frame.detections[candidates[d]];
    const double cu = det.mask.centroid().first;
    if (zones.in_stop(cu)) continue;
    Tracklet tr;
    tr.id = state.next_id++;
    tr.last_mask = det.mask;
    tr.last_frame = tr.born_frame = frame.frame_index;
    tr.born_in_start_zone = zones.in_start(cu);
    tr.spawn_gt_id = det.gt_id;
    if (reprojects) tr.points = surface_points(det.mask, frame.depth, K);
    spdlog::debug("frame {}: spawn tracklet {} (gt {})", frame.frame_index, tr.id, det.gt_id);
    state.active.push_back(std::move(tr));
  }

  state.frame_cursor = frame.frame_index;
  state.last_odometry = frame.odometry_distance;
}

int finalize(const TrackerState& state, const TrackerConfig& cfg) {
  auto legit = [&](const Tracklet& t) {
    return t.hit_count >= cfg.min_hits && !t.born_in_start_zone;
  };
  return static_cast<int>(std::count_if(state.active.begin(), state.active.end(), legit) +
                          std::count_if(state.retired.begin(), state.retired.end(), legit));
}

Tracker::Tracker(TrackerConfig cfg, Calibration calib)
    : cfg_(std::move(cfg)), calib_(std::move(calib)) {
  cfg_.validate();
}

int count_row(const FrameSource& row, const TrackerConfig& cfg) {
  Tracker tracker(cfg, row.calibration());
  for (std::size_t i = 0; i < row.size(); ++i) tracker.step(row.frame(i));
  return tracker.count();
}

}  // namespace rowtracker
