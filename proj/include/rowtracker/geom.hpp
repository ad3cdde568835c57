#pragma once

#include <filesystem>
#include <iosfwd>

#include <Eigen/Core>

#include "rowtracker/image.hpp"

namespace rowtracker {

using Point3 = Eigen::Vector3d;

/// Continuous image coordinates; integer values sit on pixel centres.
struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// Pinhole intrinsics for factory-registered (undistorted) images.
struct Intrinsics {
  double fx = 1200.0;
  double fy = 1200.0;
  double cx = 640.0;
  double cy = 360.0;
  int width = 1280;
  int height = 720;

  bool contains(const Pixel& px) const {
    return px.u >= 0.0 && px.u < width && px.v >= 0.0 && px.v < height;
  }
  /// Throws InvalidConfig when any invariant is broken.
  void validate() const;
};

/// Rigid transform stored as rotation + translation.
class Transform {
 public:
  Transform() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  Transform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {}

  static Transform identity() { return {}; }
  static Transform from_translation(const Eigen::Vector3d& t) {
    return {Eigen::Matrix3d::Identity(), t};
  }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Point3 operator()(const Point3& p) const { return rotation_ * p + translation_; }
  Transform operator*(const Transform& rhs) const {
    return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
  }
  Transform inverse() const {
    const Eigen::Matrix3d rt = rotation_.transpose();
    return {rt, -(rt * translation_)};
  }

  Eigen::Matrix4d matrix() const;

  /// Max |R^T R - I| entry plus |det R - 1|.
  double orthonormality_residual() const;
  bool is_valid(double tolerance = 1e-9) const {
    return orthonormality_residual() <= tolerance && translation_.allFinite();
  }
  bool is_identity() const {
    return rotation_ == Eigen::Matrix3d::Identity() && translation_.isZero(0.0);
  }

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

/// Rotation about the camera/platform z axis.
Transform yaw(double radians);

/// Camera intrinsics plus the camera pose in the platform (encoder) frame,
/// i.e. p_platform = camera_extrinsics(p_camera).
struct Calibration {
  Intrinsics intrinsics;
  Transform camera_extrinsics = default_camera_extrinsics();

  /// Camera looking along platform +y with image x along the rail, mounted
  /// one metre above the platform origin.
  static Transform default_camera_extrinsics();
};

/// u = fx x/z + cx, v = fy y/z + cy. Throws NonPositiveDepth for z <= 0.
Pixel project(const Point3& p, const Intrinsics& K);

/// Inverse of `project` along the pixel ray at z-depth `depth`.
Point3 back_project(const Pixel& px, double depth, const Intrinsics& K);

/// Camera motion between frames i and j from the platform motion:
/// T_ec^-1 * Te_ij * T_ec. The result maps camera-i points into camera j.
Transform camera_motion(const Transform& platform_motion, const Transform& camera_extrinsics);

/// Platform pose in the world frame after `distance` metres along the rail.
Transform rail_pose(double distance);

/// Te_ij for rail travel from `from_distance` to `to_distance`: maps
/// platform-i coordinates into platform j.
Transform rail_motion(double from_distance, double to_distance);

/// Warps every mask pixel with valid depth through `camera_motion`, rounds
/// to the nearest pixel, drops anything off-image and closes the result
/// (3x3, one pass). Throws DimensionMismatch.
Mask reproject_mask(const Mask& mask, const DepthImage& depth, const Transform& camera_motion,
                    const Intrinsics& K);

/// Rasterizes camera-frame points: projects each point with z > 0, rounds to
/// the nearest pixel and keeps in-image hits, then closes the mask.
Mask rasterize_points(std::span<const Eigen::Vector3f> points, const Intrinsics& K);

/// Calibration file: "key = value" lines with fx, fy, cx, cy, width, height
/// and T_ec as 12 numbers (row-major rotation, then translation).
Calibration read_calibration(const std::filesystem::path& path);
Calibration parse_calibration(std::istream& in);
void write_calibration(std::ostream& out, const Calibration& calib);

}  // namespace rowtracker
