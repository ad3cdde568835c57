#include "rowtracker/rowmap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rowtracker/error.hpp"

namespace rowtracker {

void PointCloud::transform(const Transform& t) {
  for (CloudPoint& p : points) p.position = t(p.position);
}

void MapConfig::validate() const {
  if (skip < 1) throw Error(ErrorCode::InvalidConfig, "skip must be >= 1");
  if (!(d_min > 0.0 && d_min < d_max)) {
    throw Error(ErrorCode::InvalidConfig, "depth range needs 0 < d_min < d_max");
  }
}

PointCloud frame_cloud(const DepthImage& depth, const ColorImage* color, const Intrinsics& K,
                       const MapConfig& cfg, std::size_t source_frame) {
  cfg.validate();
  if (depth.width() != K.width || depth.height() != K.height) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("depth is {}x{}, camera is {}x{}", depth.width(), depth.height(),
                            K.width, K.height),
                source_frame);
  }
  if (color && (color->width != K.width || color->height != K.height ||
                color->pixels.size() != static_cast<std::size_t>(K.width) * K.height)) {
    throw Error(ErrorCode::DimensionMismatch, "colour image does not match the camera",
                source_frame);
  }
  PointCloud cloud;
  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      if (!depth.valid(u, v)) continue;
      const double d = depth.meters(u, v);
      if (d < cfg.d_min || d > cfg.d_max) continue;
      CloudPoint p;
      p.position = back_project({static_cast<double>(u), static_cast<double>(v)}, d, K);
      if (color) {
        p.color = color->pixels[static_cast<std::size_t>(v) * K.width + u];
      } else {
        const double shade = 255.0 * (cfg.d_max - d) / (cfg.d_max - cfg.d_min);
        const auto g = static_cast<std::uint8_t>(std::clamp(std::lround(shade), 0L, 255L));
        p.color = {g, g, g};
      }
      p.source_frame = source_frame;
      p.source_depth = d;
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

PointCloud build_map(const FrameSource& row, const MapConfig& cfg, const Calibration& calib,
                     const Transform& origin) {
  cfg.validate();
  try {
    calib.intrinsics.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::MissingCalibration, e.what());
  }
  if (!calib.camera_extrinsics.is_valid(1e-6)) {
    throw Error(ErrorCode::MissingCalibration, "camera extrinsics are not a rigid transform");
  }
  PointCloud map;
  for (std::size_t i = 0; i < row.size(); i += cfg.skip) {
    const FrameRecord frame = row.frame(i);
    PointCloud cloud = frame_cloud(frame.depth, nullptr, calib.intrinsics, cfg, frame.frame_index);
    cloud.transform(origin * rail_pose(frame.odometry_distance) * calib.camera_extrinsics);
    spdlog::debug("map: frame {} contributes {} points", frame.frame_index, cloud.size());
    map.points.insert(map.points.end(), cloud.points.begin(), cloud.points.end());
  }
  return map;
}

PointCloud build_map(const FrameSource& row, const MapConfig& cfg, const Transform& origin) {
  return build_map(row, cfg, row.calibration(), origin);
}

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw Error(ErrorCode::IoFailure, "truncated binary PLY body");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void write_ply(std::ostream& out, const PointCloud& cloud, PlyFormat format) {
  out << "ply\n"
      << (format == PlyFormat::Ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n")
      << "element vertex " << cloud.size() << '\n'
      << "property double x\nproperty double y\nproperty double z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";
  if (format == PlyFormat::Ascii) {
    fmt::memory_buffer buf;
    for (const CloudPoint& p : cloud.points) {
      fmt::format_to(std::back_inserter(buf), "{:.6f} {:.6f} {:.6f} {} {} {}\n", p.position.x(),
                     p.position.y(), p.position.z(), p.color[0], p.color[1], p.color[2]);
      if (buf.size() > (1 << 20)) {
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        buf.clear();
      }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  } else {
    for (const CloudPoint& p : cloud.points) {
      put_le(out, p.position.x());
      put_le(out, p.position.y());
      put_le(out, p.position.z());
      out.write(reinterpret_cast<const char*>(p.color.data()), 3);
    }
  }
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing PLY stream");
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud, PlyFormat format) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, fmt::format("cannot write {}", tmp.string()));
    write_ply(out, cloud, format);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, fmt::format("cannot move {} into place", path.string()));
}

PointCloud read_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "ply") throw Error(ErrorCode::IoFailure, "not a PLY file");
  bool binary = false;
  std::size_t count = 0;
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "format") {
      std::string kind;
      ss >> kind;
      if (kind == "binary_little_endian") {
        binary = true;
      } else if (kind != "ascii") {
        throw Error(ErrorCode::IoFailure, "unsupported PLY format " + kind);
      }
    } else if (key == "element") {
      std::string name;
      ss >> name >> count;
      if (name != "vertex") throw Error(ErrorCode::IoFailure, "unexpected PLY element " + name);
    }
  }
  if (line != "end_header") throw Error(ErrorCode::IoFailure, "PLY header not terminated");

  PointCloud cloud;
  cloud.points.resize(count);
  for (CloudPoint& p : cloud.points) {
    if (binary) {
      const double x = get_le<double>(in), y = get_le<double>(in), z = get_le<double>(in);
      p.position = {x, y, z};
      for (auto& c : p.color) c = get_le<std::uint8_t>(in);
    } else {
      double x, y, z;
      int r, g, b;
      if (!(in >> x >> y >> z >> r >> g >> b)) {
        throw Error(ErrorCode::IoFailure, "truncated ASCII PLY body");
      }
      p.position = {x, y, z};
      p.color = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                 static_cast<std::uint8_t>(b)};
    }
  }
  return cloud;
}

}  // namespace rowtracker
