#include "rowtracker/geom.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <Eigen/Geometry>
#include <fmt/format.h>

#include "rowtracker/config.hpp"
#include "rowtracker/error.hpp"

namespace rowtracker {

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidConfig, "image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw Error(ErrorCode::InvalidConfig, "principal point lies outside the image");
  }
}

Eigen::Matrix4d Transform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

double Transform::orthonormality_residual() const {
  const Eigen::Matrix3d gram = rotation_.transpose() * rotation_ - Eigen::Matrix3d::Identity();
  return gram.cwiseAbs().maxCoeff() + std::abs(rotation_.determinant() - 1.0);
}

Transform yaw(double radians) {
  return {Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitZ()).toRotationMatrix(),
          Eigen::Vector3d::Zero()};
}

Transform Calibration::default_camera_extrinsics() {
  Eigen::Matrix3d r;
  // Columns are the camera axes expressed in the platform frame:
  // x right = +x (rail), y down = -z, z forward = +y.
  r << 1, 0, 0,
       0, 0, 1,
       0, -1, 0;
  return {r, Eigen::Vector3d(0.0, 0.0, 1.0)};
}

Pixel project(const Point3& p, const Intrinsics& K) {
  if (!(p.z() > 0.0)) {
    throw Error(ErrorCode::NonPositiveDepth, fmt::format("cannot project point with z = {}", p.z()));
  }
  return {K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy};
}

Point3 back_project(const Pixel& px, double depth, const Intrinsics& K) {
  if (!(depth > 0.0)) {
    throw Error(ErrorCode::NonPositiveDepth, fmt::format("cannot back-project depth {}", depth));
  }
  return {(px.u - K.cx) * depth / K.fx, (px.v - K.cy) * depth / K.fy, depth};
}

Transform camera_motion(const Transform& platform_motion, const Transform& camera_extrinsics) {
  return camera_extrinsics.inverse() * platform_motion * camera_extrinsics;
}

Transform rail_pose(double distance) {
  return Transform::from_translation({distance, 0.0, 0.0});
}

Transform rail_motion(double from_distance, double to_distance) {
  return rail_pose(to_distance).inverse() * rail_pose(from_distance);
}

Mask rasterize_points(std::span<const Eigen::Vector3f> points, const Intrinsics& K) {
  const int w = K.width, h = K.height;
  Roi box{w, h, -1, -1};
  std::vector<std::pair<int, int>> hits;
  hits.reserve(points.size());
  const float fx = static_cast<float>(K.fx), fy = static_cast<float>(K.fy);
  const float cx = static_cast<float>(K.cx), cy = static_cast<float>(K.cy);
  for (const Eigen::Vector3f& p : points) {
    if (!(p.z() > 0.0f)) continue;
    const float iz = 1.0f / p.z();
    const float u = std::floor(fx * p.x() * iz + cx + 0.5f);
    const float v = std::floor(fy * p.y() * iz + cy + 0.5f);
    if (!(u >= 0.0f && u < static_cast<float>(w) && v >= 0.0f && v < static_cast<float>(h))) {
      continue;
    }
    const int iu = static_cast<int>(u), iv = static_cast<int>(v);
    hits.emplace_back(iu, iv);
    box.x0 = std::min(box.x0, iu);
    box.y0 = std::min(box.y0, iv);
    box.x1 = std::max(box.x1, iu + 1);
    box.y1 = std::max(box.y1, iv + 1);
  }
  if (hits.empty()) return Mask(w, h);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(box.width()) * box.height(), 0);
  for (const auto& [u, v] : hits) {
    bits[static_cast<std::size_t>(v - box.y0) * box.width() + (u - box.x0)] = 1;
  }
  return close(w, h, box, std::move(bits));
}

Mask reproject_mask(const Mask& mask, const DepthImage& depth, const Transform& camera_motion,
                    const Intrinsics& K) {
  if (mask.width() != K.width || mask.height() != K.height || depth.width() != K.width ||
      depth.height() != K.height) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("mask {}x{}, depth {}x{}, camera {}x{}", mask.width(), mask.height(),
                            depth.width(), depth.height(), K.width, K.height));
  }
  std::vector<Eigen::Vector3f> moved;
  moved.reserve(mask.count());
  const Eigen::Matrix3d& r = camera_motion.rotation();
  const Eigen::Vector3d& t = camera_motion.translation();
  mask.for_each([&](int u, int v) {
    if (!depth.valid(u, v)) return;
    const Point3 p = back_project({static_cast<double>(u), static_cast<double>(v)},
                                  depth.meters(u, v), K);
    moved.push_back((r * p + t).cast<float>());
  });
  return rasterize_points(moved, K);
}

Calibration parse_calibration(std::istream& in) {
  const KeyValues kv = KeyValues::parse(in, "calibration");
  Calibration calib;
  Intrinsics& K = calib.intrinsics;
  K.fx = kv.number("fx");
  K.fy = kv.number("fy");
  K.cx = kv.number("cx");
  K.cy = kv.number("cy");
  K.width = kv.integer("width");
  K.height = kv.integer("height");
  K.validate();

  const std::vector<double> t = kv.numbers("T_ec");
  if (t.size() != 12) {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("T_ec needs 12 numbers, got {}", t.size()));
  }
  Eigen::Matrix3d r;
  r << t[0], t[1], t[2], t[3], t[4], t[5], t[6], t[7], t[8];
  calib.camera_extrinsics = Transform(r, Eigen::Vector3d(t[9], t[10], t[11]));
  if (!calib.camera_extrinsics.is_valid(1e-6)) {
    throw Error(ErrorCode::InvalidConfig, "T_ec rotation is not orthonormal");
  }
  return calib;
}

Calibration read_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::MissingCalibration, fmt::format("cannot open {}", path.string()));
  }
  return parse_calibration(in);
}

void write_calibration(std::ostream& out, const Calibration& calib) {
  const Intrinsics& K = calib.intrinsics;
  out << "fx = " << format_exact(K.fx) << '\n'
      << "fy = " << format_exact(K.fy) << '\n'
      << "cx = " << format_exact(K.cx) << '\n'
      << "cy = " << format_exact(K.cy) << '\n'
      << "width = " << K.width << '\n'
      << "height = " << K.height << '\n'
      << "T_ec =";
  const Eigen::Matrix3d& r = calib.camera_extrinsics.rotation();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out << ' ' << format_exact(r(i, j));
  }
  for (int i = 0; i < 3; ++i) out << ' ' << format_exact(calib.camera_extrinsics.translation()(i));
  out << '\n';
}

}  // namespace rowtracker
