#include "rowtracker/dataset.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <unistd.h>

#include "rowtracker/config.hpp"
#include "rowtracker/error.hpp"

namespace rowtracker {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "depth files are little-endian; big-endian hosts need byte swapping");

void write_mask_rle(std::ostream& out, const Mask& mask) {
  std::vector<std::uint64_t> runs;
  bool fg = false;
  std::uint64_t run = 0;
  for (int v = 0; v < mask.height(); ++v) {
    for (int u = 0; u < mask.width(); ++u) {
      if (mask.at(u, v) != fg) {
        runs.push_back(run);
        run = 0;
        fg = !fg;
      }
      ++run;
    }
  }
  runs.push_back(run);
  out << mask.width() << ' ' << mask.height() << ' ' << runs.size() << '\n';
  for (std::size_t i = 0; i < runs.size(); ++i) out << (i ? " " : "") << runs[i];
  out << '\n';
}

Mask read_mask_rle(std::istream& in) {
  long long w = -1, h = -1, count = -1;
  if (!(in >> w >> h >> count) || w < 0 || h < 0 || count < 0) {
    throw Error(ErrorCode::CorruptManifest, "bad RLE mask header");
  }
  const std::size_t total = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<std::uint8_t> bits(total, 0);
  std::size_t pos = 0;
  bool fg = false;
  for (long long i = 0; i < count; ++i) {
    long long run = -1;
    if (!(in >> run) || run < 0 || pos + static_cast<std::size_t>(run) > total) {
      throw Error(ErrorCode::CorruptManifest, "bad RLE run");
    }
    if (fg) std::fill_n(bits.begin() + static_cast<std::ptrdiff_t>(pos), run, 1);
    pos += static_cast<std::size_t>(run);
    fg = !fg;
  }
  if (pos != total) {
    throw Error(ErrorCode::CorruptManifest,
                fmt::format("RLE runs cover {} pixels, expected {}", pos, total));
  }
  return Mask::from_dense(static_cast<int>(w), static_cast<int>(h), bits);
}

void write_detections(std::ostream& out, const std::vector<Detection>& detections) {
  out << "detections " << detections.size() << '\n';
  for (const Detection& d : detections) {
    out << "detection " << format_exact(d.confidence) << ' ' << d.gt_id << '\n';
    write_mask_rle(out, d.mask);
  }
}

std::vector<Detection> read_detections(std::istream& in) {
  std::string tag;
  std::size_t k = 0;
  if (!(in >> tag >> k) || tag != "detections") {
    throw Error(ErrorCode::CorruptManifest, "detection file must start with 'detections K'");
  }
  std::vector<Detection> out(k);
  for (Detection& d : out) {
    std::string conf_text;
    if (!(in >> tag >> conf_text >> d.gt_id) || tag != "detection") {
      throw Error(ErrorCode::CorruptManifest, "bad detection header");
    }
    const auto [ptr, ec] =
        std::from_chars(conf_text.data(), conf_text.data() + conf_text.size(), d.confidence);
    if (ec != std::errc() || ptr != conf_text.data() + conf_text.size()) {
      throw Error(ErrorCode::CorruptManifest, "bad detection confidence '" + conf_text + "'");
    }
    d.mask = read_mask_rle(in);
  }
  return out;
}

void write_depth(std::ostream& out, const DepthImage& depth) {
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(depth.width()),
                                   static_cast<std::uint32_t>(depth.height())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  const auto data = depth.data();
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(std::uint16_t)));
}

namespace {

std::pair<std::uint32_t, std::uint32_t> read_depth_header(std::istream& in) {
  std::uint32_t header[2];
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header))) {
    throw Error(ErrorCode::CorruptManifest, "truncated depth header");
  }
  return {header[0], header[1]};
}

}  // namespace

DepthImage read_depth(std::istream& in) {
  const auto [w, h] = read_depth_header(in);
  std::vector<std::uint16_t> mm(static_cast<std::size_t>(w) * h);
  if (!in.read(reinterpret_cast<char*>(mm.data()),
               static_cast<std::streamsize>(mm.size() * sizeof(std::uint16_t)))) {
    throw Error(ErrorCode::CorruptManifest, "truncated depth body");
  }
  return DepthImage(static_cast<int>(w), static_cast<int>(h), std::move(mm));
}

namespace {

std::string frame_stem(std::size_t i) { return fmt::format("{:06d}", i); }

fs::path mask_path(const fs::path& root, std::size_t i) {
  return root / "masks" / (frame_stem(i) + ".rle");
}
fs::path depth_path(const fs::path& root, std::size_t i) {
  return root / "depth" / (frame_stem(i) + ".depth");
}

template <class F>
auto with_frame(std::size_t index, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.frame()) throw;
    throw Error(e.code(), e.what(), index);
  }
}

}  // namespace

RowDataset RowDataset::load(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::MissingFile, fmt::format("{} is not a directory", root.string()));
  }
  RowDataset ds;
  ds.root_ = root;
  ds.id_ = fs::path(root).lexically_normal().filename().string();
  if (ds.id_.empty()) ds.id_ = fs::path(root).lexically_normal().parent_path().filename().string();

  const fs::path manifest_file = root / "manifest.txt";
  if (!fs::exists(manifest_file)) {
    throw Error(ErrorCode::MissingFile, fmt::format("{} not found", manifest_file.string()));
  }
  try {
    const KeyValues kv = KeyValues::load(manifest_file);
    if (kv.text("format") != "rowtracker-dataset 1") {
      throw Error(ErrorCode::CorruptManifest, "unsupported dataset format " + kv.text("format"));
    }
    const int frames = kv.integer("frames");
    if (frames < 0) throw Error(ErrorCode::CorruptManifest, "negative frame count");
    ds.manifest_.frames = static_cast<std::size_t>(frames);
    ds.manifest_.camera = kv.text("camera");
    ds.manifest_.calibration = kv.text("calibration");
    if (kv.has("gt_count")) ds.manifest_.gt_count = kv.integer("gt_count");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptManifest) throw;
    throw Error(ErrorCode::CorruptManifest, e.what());
  }

  const fs::path calib_file = root / ds.manifest_.calibration;
  if (!fs::exists(calib_file)) {
    throw Error(ErrorCode::MissingCalibration, fmt::format("{} not found", calib_file.string()));
  }
  ds.calibration_ = read_calibration(calib_file);
  const Intrinsics& K = ds.calibration_.intrinsics;

  const fs::path odo_file = root / "odometry.csv";
  std::ifstream odo(odo_file);
  if (!odo) throw Error(ErrorCode::MissingFile, fmt::format("{} not found", odo_file.string()));
  std::string line;
  std::getline(odo, line);
  if (line != "frame_index,distance_m") {
    throw Error(ErrorCode::CorruptManifest, "odometry.csv header must be frame_index,distance_m");
  }
  while (std::getline(odo, line)) {
    if (line.empty()) continue;
    const std::size_t expected = ds.odometry_.size();
    const auto comma = line.find(',');
    std::size_t index = 0;
    double distance = 0.0;
    const char* end = line.data() + line.size();
    if (comma == std::string::npos ||
        std::from_chars(line.data(), line.data() + comma, index).ptr != line.data() + comma ||
        std::from_chars(line.data() + comma + 1, end, distance).ptr != end) {
      throw Error(ErrorCode::CorruptManifest, "malformed odometry line '" + line + "'", expected);
    }
    if (index != expected) {
      throw Error(ErrorCode::CorruptManifest, "odometry entries must be contiguous", expected);
    }
    if (!ds.odometry_.empty() && distance < ds.odometry_.back()) {
      throw Error(ErrorCode::CorruptManifest, "odometry decreases", expected);
    }
    ds.odometry_.push_back(distance);
  }
  if (ds.odometry_.size() != ds.manifest_.frames) {
    throw Error(ErrorCode::CorruptManifest,
                fmt::format("odometry has {} entries, manifest says {} frames", ds.odometry_.size(),
                            ds.manifest_.frames),
                std::min(ds.odometry_.size(), ds.manifest_.frames));
  }

  for (std::size_t i = 0; i < ds.manifest_.frames; ++i) {
    if (!fs::exists(mask_path(root, i))) {
      throw Error(ErrorCode::MissingFile, mask_path(root, i).string() + " not found", i);
    }
    const fs::path dp = depth_path(root, i);
    std::ifstream depth(dp, std::ios::binary);
    if (!depth) throw Error(ErrorCode::MissingFile, dp.string() + " not found", i);
    const auto [w, h] = with_frame(i, [&] { return read_depth_header(depth); });
    if (static_cast<int>(w) != K.width || static_cast<int>(h) != K.height) {
      throw Error(ErrorCode::DimensionMismatch,
                  fmt::format("depth is {}x{}, calibration is {}x{}", w, h, K.width, K.height), i);
    }
  }
  spdlog::info("loaded dataset {} with {} frames", ds.id_, ds.manifest_.frames);
  return ds;
}

FrameRecord RowDataset::frame(std::size_t index) const {
  if (index >= size()) {
    throw Error(ErrorCode::MissingFile, fmt::format("dataset has {} frames", size()), index);
  }
  return with_frame(index, [&] {
    FrameRecord f;
    f.frame_index = index;
    f.odometry_distance = odometry_[index];
    std::ifstream masks(mask_path(root_, index));
    if (!masks) throw Error(ErrorCode::MissingFile, mask_path(root_, index).string() + " not found");
    f.detections = read_detections(masks);
    std::ifstream depth(depth_path(root_, index), std::ios::binary);
    if (!depth) {
      throw Error(ErrorCode::MissingFile, depth_path(root_, index).string() + " not found");
    }
    f.depth = read_depth(depth);
    const Intrinsics& K = calibration_.intrinsics;
    if (f.depth.width() != K.width || f.depth.height() != K.height) {
      throw Error(ErrorCode::DimensionMismatch, "depth does not match calibration");
    }
    for (const Detection& d : f.detections) {
      if (d.mask.width() != K.width || d.mask.height() != K.height) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("mask is {}x{}, calibration is {}x{}", d.mask.width(),
                                d.mask.height(), K.width, K.height));
      }
    }
    return f;
  });
}

RowDataset load_dataset(const fs::path& root) { return RowDataset::load(root); }

void write_dataset(const fs::path& root, const FrameSource& row, const std::string& camera) {
  const fs::path target = fs::absolute(root).lexically_normal();
  const fs::path parent = target.has_filename() ? target.parent_path()
                                                : target.parent_path().parent_path();
  const std::string name = target.has_filename() ? target.filename().string()
                                                 : target.parent_path().filename().string();
  const fs::path final_dir = parent / name;
  const fs::path staging = parent / fmt::format(".{}.tmp{}", name, ::getpid());
  std::error_code ec;
  fs::create_directories(parent, ec);
  fs::remove_all(staging, ec);
  if (!fs::create_directories(staging / "masks", ec) || !fs::create_directories(staging / "depth", ec)) {
    throw Error(ErrorCode::IoFailure, fmt::format("cannot create {}", staging.string()));
  }

  auto open = [](const fs::path& p, std::ios::openmode mode) {
    std::ofstream out(p, mode);
    if (!out) throw Error(ErrorCode::IoFailure, fmt::format("cannot write {}", p.string()));
    return out;
  };

  {
    std::ofstream out = open(staging / "calibration.txt", std::ios::out);
    write_calibration(out, row.calibration());
  }
  {
    std::ofstream out = open(staging / "manifest.txt", std::ios::out);
    out << "format = rowtracker-dataset 1\n"
        << "frames = " << row.size() << '\n'
        << "camera = " << camera << '\n'
        << "calibration = calibration.txt\n";
    if (row.gt_count()) out << "gt_count = " << *row.gt_count() << '\n';
  }
  std::ofstream odo = open(staging / "odometry.csv", std::ios::out);
  odo << "frame_index,distance_m\n";
  for (std::size_t i = 0; i < row.size(); ++i) {
    const FrameRecord f = row.frame(i);
    odo << i << ',' << format_exact(f.odometry_distance) << '\n';
    {
      std::ofstream out = open(mask_path(staging, i), std::ios::out);
      write_detections(out, f.detections);
      if (!out) throw Error(ErrorCode::IoFailure, "failed writing masks", i);
    }
    {
      std::ofstream out = open(depth_path(staging, i), std::ios::out | std::ios::binary);
      write_depth(out, f.depth);
      if (!out) throw Error(ErrorCode::IoFailure, "failed writing depth", i);
    }
  }
  odo.close();
  if (!odo) throw Error(ErrorCode::IoFailure, "failed writing odometry.csv");

  fs::remove_all(final_dir, ec);
  fs::rename(staging, final_dir, ec);
  if (ec) {
    throw Error(ErrorCode::IoFailure,
                fmt::format("cannot move dataset into {}: {}", final_dir.string(), ec.message()));
  }
}

}  // namespace rowtracker
