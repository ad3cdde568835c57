#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "rowtracker/frame.hpp"

namespace rowtracker {

using Rgb = std::array<std::uint8_t, 3>;

struct CloudPoint {
  Point3 position = Point3::Zero();  // m
  Rgb color{255, 255, 255};
  std::size_t source_frame = 0;
  /// Camera-frame depth of the pixel that produced the point.
  double source_depth = 0.0;
};

struct PointCloud {
  std::vector<CloudPoint> points;

  std::size_t size() const { return points.size(); }
  void transform(const Transform& t);
};

struct MapConfig {
  std::size_t skip = 60;  // frames between kept frames
  double d_min = 0.2;     // m
  double d_max = 1.4;     // m

  void validate() const;
};

/// Row-major 8-bit RGB image registered to the depth image.
struct ColorImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;
};

/// Camera-frame cloud with one point per pixel whose depth lies in
/// [d_min, d_max]. Without a colour image, points get grey levels mapped
/// from depth (near = bright). Throws DimensionMismatch.
PointCloud frame_cloud(const DepthImage& depth, const ColorImage* color, const Intrinsics& K,
                       const MapConfig& cfg, std::size_t source_frame = 0);

/// Concatenates the clouds of frames 0, skip, 2 skip, ... in the world frame.
/// Each frame is placed at origin * rail_pose(odometry) * T_ec. No fusion or
/// deduplication. Throws MissingCalibration for a source without a usable
/// camera model.
PointCloud build_map(const FrameSource& row, const MapConfig& cfg,
                     const Transform& origin = Transform::identity());
PointCloud build_map(const FrameSource& row, const MapConfig& cfg, const Calibration& calib,
                     const Transform& origin = Transform::identity());

enum class PlyFormat { Ascii, BinaryLittleEndian };

/// PLY with vertex properties x y z (metres) and red green blue. ASCII
/// bodies print coordinates with 6 decimals. Throws IoFailure.
void write_ply(std::ostream& out, const PointCloud& cloud, PlyFormat format = PlyFormat::Ascii);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud,
               PlyFormat format = PlyFormat::Ascii);

/// Reads the subset of PLY that write_ply emits (both encodings).
PointCloud read_ply(std::istream& in);

}  // namespace rowtracker
