#include "rowtracker/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "rowtracker/config.hpp"
#include "rowtracker/error.hpp"

namespace rowtracker {

namespace {

constexpr double kRowDepthLimit = 1.4;  // m, far edge of the surveyed row
constexpr double kMinVisibleFraction = 0.1;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt) {
  return std::mt19937_64(splitmix64(splitmix64(seed ^ salt) + stream));
}

std::string row_tag_text(RowTag tag) { return tag == RowTag::Foreground ? "fg" : "bg"; }

}  // namespace

void SceneSpec::validate() const {
  if (!(rail_length > 0.0) || !(speed > 0.0) || !(frame_rate > 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "rail_length, speed and frame_rate must be positive");
  }
  for (std::size_t i = 0; i < fruits.size(); ++i) {
    const Fruit& f = fruits[i];
    if (!f.center.allFinite() || !(f.radius > 0.0)) {
      throw Error(ErrorCode::InvalidSpec, fmt::format("fruit {}: bad centre or radius", i));
    }
    const double depth = f.center.y();
    if (f.row == RowTag::Foreground && !(depth >= 0.2 && depth <= kRowDepthLimit)) {
      throw Error(ErrorCode::InvalidSpec,
                  fmt::format("fruit {}: foreground depth {} outside [0.2, 1.4] m", i, depth));
    }
    if (f.row == RowTag::Background && !(depth - f.radius > kRowDepthLimit)) {
      throw Error(ErrorCode::InvalidSpec,
                  fmt::format("fruit {}: background fruit surface at {} m is not beyond 1.4 m", i,
                              depth - f.radius));
    }
  }
  for (std::size_t i = 0; i < occluders.size(); ++i) {
    const Box& b = occluders[i];
    if (!b.min.allFinite() || !b.max.allFinite() || !(b.min.array() < b.max.array()).all()) {
      throw Error(ErrorCode::InvalidSpec, fmt::format("occluder {}: min must be below max", i));
    }
  }
}

SceneSpec parse_scene_spec(std::istream& in, const std::string& source) {
  SceneSpec spec;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::InvalidSpec, fmt::format("{}:{}: {}", source, line_no, what));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    auto num = [&](const std::string& t) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc() || ptr != t.data() + t.size()) fail("not a number: '" + t + "'");
      return v;
    };

    if (tok[0] == "rail_length" || tok[0] == "speed" || tok[0] == "frame_rate") {
      if (tok.size() != 2) fail("expected '" + tok[0] + " <value>'");
      const double v = num(tok[1]);
      if (tok[0] == "rail_length") spec.rail_length = v;
      if (tok[0] == "speed") spec.speed = v;
      if (tok[0] == "frame_rate") spec.frame_rate = v;
    } else if (tok[0] == "box") {
      if (tok.size() != 7) fail("expected 'box xmin ymin zmin xmax ymax zmax'");
      spec.occluders.push_back({{num(tok[1]), num(tok[2]), num(tok[3])},
                                {num(tok[4]), num(tok[5]), num(tok[6])}});
    } else {
      if (tok.size() != 5) fail("expected 'x y z radius fg|bg'");
      Fruit f;
      f.center = {num(tok[0]), num(tok[1]), num(tok[2])};
      f.radius = num(tok[3]);
      if (tok[4] == "fg") {
        f.row = RowTag::Foreground;
      } else if (tok[4] == "bg") {
        f.row = RowTag::Background;
      } else {
        fail("row tag must be fg or bg");
      }
      spec.fruits.push_back(f);
    }
  }
  spec.validate();
  return spec;
}

SceneSpec read_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, fmt::format("cannot open {}", path.string()));
  return parse_scene_spec(in, path.string());
}

void write_scene_spec(std::ostream& out, const SceneSpec& spec) {
  out << "rail_length " << format_exact(spec.rail_length) << '\n'
      << "speed " << format_exact(spec.speed) << '\n'
      << "frame_rate " << format_exact(spec.frame_rate) << '\n';
  for (const Fruit& f : spec.fruits) {
    out << format_exact(f.center.x()) << ' ' << format_exact(f.center.y()) << ' '
        << format_exact(f.center.z()) << ' ' << format_exact(f.radius) << ' '
        << row_tag_text(f.row) << '\n';
  }
  for (const Box& b : spec.occluders) {
    out << "box";
    for (int i = 0; i < 3; ++i) out << ' ' << format_exact(b.min(i));
    for (int i = 0; i < 3; ++i) out << ' ' << format_exact(b.max(i));
    out << '\n';
  }
}

void NoiseSpec::validate() const {
  if (!(odometry_sigma >= 0.0)) throw Error(ErrorCode::InvalidSpec, "odometry_sigma must be >= 0");
  if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "dropout_prob must lie in [0, 1]");
  }
  if (!(false_positive_rate >= 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "false_positive_rate must be >= 0");
  }
  if (mask_jitter < 0) throw Error(ErrorCode::InvalidSpec, "mask_jitter must be >= 0");
}

Scene::Scene(SceneSpec spec, Calibration calibration)
    : spec_(std::move(spec)), calibration_(std::move(calibration)) {
  spec_.validate();
  calibration_.intrinsics.validate();
  // Small slack so a rail length that is a whole number of steps keeps its
  // last frame despite rounding in step().
  frame_count_ = static_cast<std::size_t>(std::floor(spec_.rail_length / step() + 1e-9)) + 1;
}

double Scene::rail_position(std::size_t frame_index) const {
  return static_cast<double>(frame_index) * step();
}

int Scene::foreground_count() const {
  return static_cast<int>(std::count_if(spec_.fruits.begin(), spec_.fruits.end(), [](const Fruit& f) {
    return f.row == RowTag::Foreground;
  }));
}

Scene generate_scene(const SceneSpec& spec, const Calibration& calibration) {
  return Scene(spec, calibration);
}

namespace {

// Image-plane extent of the silhouette of a sphere along one axis, from the
// two tangent planes through the camera centre. `span` is the image size
// along that axis. Returns nullopt when the silhouette cannot reach the image;
// an extent reaching past +-1.5 rad is clamped there, which lies far outside
// any image of a sane field of view.
struct Extent {
  bool bounded = true;
  double lo = 0.0, hi = 0.0;
};

std::optional<Extent> silhouette_extent(double lateral, double z, double r, double f, double c,
                                        int span) {
  const double rho = std::hypot(lateral, z);
  if (rho <= r) return Extent{false};
  const double centre = std::atan2(lateral, z);
  const double half = std::asin(r / rho);
  double lo = centre - half, hi = centre + half;
  const double view_lo = std::atan((-1.0 - c) / f), view_hi = std::atan((span + 1.0 - c) / f);
  if (hi < view_lo || lo > view_hi) return std::nullopt;
  constexpr double kLimit = 1.5;
  lo = std::max(lo, -kLimit);
  hi = std::min(hi, kLimit);
  return Extent{true, c + f * std::tan(lo), c + f * std::tan(hi)};
}

struct SphereHit {
  Eigen::Vector3d c;
  double r;

  // z-depth of the first intersection along pixel ray (a, b, 1), or +inf.
  double depth(double a, double b) const {
    const double dc = a * c.x() + b * c.y() + c.z();
    const double dd = a * a + b * b + 1.0;
    const double cc = c.squaredNorm() - r * r;
    const double disc = dc * dc - dd * cc;
    if (disc < 0.0) return std::numeric_limits<double>::infinity();
    const double sq = std::sqrt(disc);
    double t = (dc - sq) / dd;
    if (t <= 0.0) t = (dc + sq) / dd;
    return t > 0.0 ? t : std::numeric_limits<double>::infinity();
  }
};

double box_depth(const Box& b, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(dir(i)) < 1e-12) {
      if (origin(i) < b.min(i) || origin(i) > b.max(i)) return std::numeric_limits<double>::infinity();
      continue;
    }
    double t1 = (b.min(i) - origin(i)) / dir(i);
    double t2 = (b.max(i) - origin(i)) / dir(i);
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
  }
  if (t_near > t_far || t_near <= 0.0) return std::numeric_limits<double>::infinity();
  return t_near;
}

}  // namespace

FrameRecord render_frame(const Scene& scene, double rail_position, std::size_t frame_index) {
  const Calibration& calib = scene.calibration();
  const Intrinsics& K = calib.intrinsics;
  const int W = K.width, H = K.height;
  const Roi image{0, 0, W, H};
  const Transform world_from_camera = rail_pose(rail_position) * calib.camera_extrinsics;
  const Transform camera_from_world = world_from_camera.inverse();

  // Scratch buffers persist per thread; only the touched regions are read
  // and they are reset before returning.
  thread_local std::vector<double> zbuf;
  thread_local std::vector<std::int32_t> owner;
  const std::size_t pixels = static_cast<std::size_t>(W) * H;
  if (zbuf.size() != pixels) {
    zbuf.assign(pixels, std::numeric_limits<double>::infinity());
    owner.assign(pixels, -1);
  }
  std::vector<Roi> touched;
  auto ray_a = [&](int u) { return (u - K.cx) / K.fx; };
  auto ray_b = [&](int v) { return (v - K.cy) / K.fy; };

  struct FruitView {
    SphereHit sphere;
    Roi full;     // silhouette box, possibly beyond the image
    Roi clipped;  // silhouette box inside the image
    std::size_t in_image_hits = 0;
  };
  const auto& fruits = scene.spec().fruits;
  std::vector<FruitView> views(fruits.size());

  for (std::size_t i = 0; i < fruits.size(); ++i) {
    FruitView& view = views[i];
    view.sphere = {camera_from_world(fruits[i].center), fruits[i].radius};
    const Eigen::Vector3d& c = view.sphere.c;
    if (c.z() + view.sphere.r <= 0.0) continue;
    const auto ux = silhouette_extent(c.x(), c.z(), view.sphere.r, K.fx, K.cx, W);
    const auto vy = silhouette_extent(c.y(), c.z(), view.sphere.r, K.fy, K.cy, H);
    if (!ux || !vy) continue;
    if (ux->bounded && vy->bounded) {
      view.full = {static_cast<int>(std::floor(ux->lo)) - 1, static_cast<int>(std::floor(vy->lo)) - 1,
                   static_cast<int>(std::ceil(ux->hi)) + 2, static_cast<int>(std::ceil(vy->hi)) + 2};
      view.full = view.full.intersect({-4 * W, -4 * H, 5 * W, 5 * H});
    } else {
      view.full = image;
    }
    view.clipped = view.full.intersect(image);
    if (!view.clipped.empty()) touched.push_back(view.clipped);
    for (int v = view.clipped.y0; v < view.clipped.y1; ++v) {
      const double b = ray_b(v);
      for (int u = view.clipped.x0; u < view.clipped.x1; ++u) {
        const double d = view.sphere.depth(ray_a(u), b);
        if (!std::isfinite(d)) continue;
        ++view.in_image_hits;
        const std::size_t k = static_cast<std::size_t>(v) * W + u;
        if (d < zbuf[k]) {
          zbuf[k] = d;
          owner[k] = static_cast<std::int32_t>(i);
        }
      }
    }
  }

  const Eigen::Matrix3d& rwc = world_from_camera.rotation();
  const Eigen::Vector3d origin = world_from_camera.translation();
  const auto& boxes = scene.spec().occluders;
  for (std::size_t j = 0; j < boxes.size(); ++j) {
    const Box& box = boxes[j];
    Roi region{W, H, 0, 0};
    bool bounded = true;
    for (int corner = 0; corner < 8; ++corner) {
      const Point3 pw(corner & 1 ? box.max.x() : box.min.x(), corner & 2 ? box.max.y() : box.min.y(),
                      corner & 4 ? box.max.z() : box.min.z());
      const Point3 pc = camera_from_world(pw);
      if (pc.z() <= 1e-6) {
        bounded = false;
        break;
      }
      const Pixel px = project(pc, K);
      region.x0 = std::min(region.x0, static_cast<int>(std::floor(px.u)) - 1);
      region.y0 = std::min(region.y0, static_cast<int>(std::floor(px.v)) - 1);
      region.x1 = std::max(region.x1, static_cast<int>(std::ceil(px.u)) + 2);
      region.y1 = std::max(region.y1, static_cast<int>(std::ceil(px.v)) + 2);
    }
    region = bounded ? region.intersect(image) : image;
    if (!region.empty()) touched.push_back(region);
    const std::int32_t tag = -2 - static_cast<std::int32_t>(j);
    for (int v = region.y0; v < region.y1; ++v) {
      const double b = ray_b(v);
      for (int u = region.x0; u < region.x1; ++u) {
        const Eigen::Vector3d dir = rwc * Eigen::Vector3d(ray_a(u), b, 1.0);
        const double d = box_depth(box, origin, dir);
        const std::size_t k = static_cast<std::size_t>(v) * W + u;
        if (d < zbuf[k]) {
          zbuf[k] = d;
          owner[k] = tag;
        }
      }
    }
  }

  FrameRecord frame;
  frame.frame_index = frame_index;
  frame.odometry_distance = rail_position;
  frame.depth = DepthImage(W, H);
  for (const Roi& r : touched) {
    for (int v = r.y0; v < r.y1; ++v) {
      for (int u = r.x0; u < r.x1; ++u) {
        const std::size_t k = static_cast<std::size_t>(v) * W + u;
        if (owner[k] != -1) frame.depth.set_mm(u, v, DepthImage::to_mm(zbuf[k]));
      }
    }
  }

  for (std::size_t i = 0; i < fruits.size(); ++i) {
    const FruitView& view = views[i];
    if (view.in_image_hits == 0 || view.clipped.empty()) continue;
    const Roi& box = view.clipped;
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(box.width()) * box.height(), 0);
    std::size_t visible = 0;
    for (int v = box.y0; v < box.y1; ++v) {
      for (int u = box.x0; u < box.x1; ++u) {
        if (owner[static_cast<std::size_t>(v) * W + u] == static_cast<std::int32_t>(i)) {
          bits[static_cast<std::size_t>(v - box.y0) * box.width() + (u - box.x0)] = 1;
          ++visible;
        }
      }
    }
    if (visible == 0) continue;

    // Silhouette pixels beyond the image border count as hidden.
    std::size_t silhouette = view.in_image_hits;
    if (!(view.full == view.clipped)) {
      for (int v = view.full.y0; v < view.full.y1; ++v) {
        const double b = ray_b(v);
        for (int u = view.full.x0; u < view.full.x1; ++u) {
          if (box.contains(u, v)) continue;
          silhouette += static_cast<std::size_t>(std::isfinite(view.sphere.depth(ray_a(u), b)));
        }
      }
    }
    const double fraction = static_cast<double>(visible) / static_cast<double>(silhouette);
    if (fraction < kMinVisibleFraction) continue;

    Detection det;
    det.mask = Mask(W, H, box, bits);
    det.confidence = std::min(1.0, fraction);
    det.gt_id = static_cast<int>(i);
    frame.detections.push_back(std::move(det));
  }
  for (const Roi& r : touched) {
    for (int v = r.y0; v < r.y1; ++v) {
      const std::size_t row = static_cast<std::size_t>(v) * W;
      std::fill(zbuf.begin() + row + r.x0, zbuf.begin() + row + r.x1,
                std::numeric_limits<double>::infinity());
      std::fill(owner.begin() + row + r.x0, owner.begin() + row + r.x1, -1);
    }
  }
  return frame;
}

FrameRecord render_frame(const Scene& scene, std::size_t frame_index) {
  return render_frame(scene, scene.rail_position(frame_index), frame_index);
}

FrameRecord perturb(const FrameRecord& frame, const NoiseSpec& noise) {
  noise.validate();
  if (noise.is_zero()) return frame;
  std::mt19937_64 rng = stream_rng(noise.seed, frame.frame_index, 0x6465746563740000ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> jitter(-noise.mask_jitter, noise.mask_jitter);

  FrameRecord out;
  out.frame_index = frame.frame_index;
  out.odometry_distance = frame.odometry_distance;
  out.depth = frame.depth;
  for (const Detection& det : frame.detections) {
    if (unit(rng) < noise.dropout_prob) continue;
    Detection d = det;
    const int k = noise.mask_jitter > 0 ? jitter(rng) : 0;
    if (k > 0) d.mask = dilate(d.mask, k);
    if (k < 0) d.mask = erode(d.mask, -k);
    if (d.mask.empty()) continue;
    out.detections.push_back(std::move(d));
  }

  if (noise.false_positive_rate > 0.0) {
    const int W = frame.depth.width(), H = frame.depth.height();
    std::poisson_distribution<int> spurious(noise.false_positive_rate);
    std::uniform_real_distribution<double> radius(8.0, 48.0), depth(0.3, 1.3), conf(0.3, 0.9);
    const int n = spurious(rng);
    for (int i = 0; i < n; ++i) {
      const double cu = unit(rng) * W, cv = unit(rng) * H;
      Detection fp;
      fp.mask = Mask::disk(W, H, cu, cv, radius(rng));
      const std::uint16_t mm = DepthImage::to_mm(depth(rng));
      fp.confidence = conf(rng);
      if (fp.mask.empty()) continue;
      fp.mask.for_each([&](int u, int v) {
        if (!out.depth.valid(u, v)) out.depth.set_mm(u, v, mm);
      });
      out.detections.push_back(std::move(fp));
    }
  }
  return out;
}

std::vector<double> perturb_odometry(std::span<const double> distances, const NoiseSpec& noise) {
  noise.validate();
  std::vector<double> out(distances.begin(), distances.end());
  if (noise.odometry_sigma == 0.0 || out.empty()) return out;
  std::mt19937_64 rng = stream_rng(noise.seed, 0, 0x6f646f6d65747279ULL);
  std::normal_distribution<double> err(0.0, noise.odometry_sigma);
  double drift = 0.0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double truth = distances[i] - distances[i - 1];
    const double increment = std::max(0.0, truth + err(rng));
    drift += increment - truth;
    out[i] = std::max(distances[i] + drift, out[i - 1]);
  }
  return out;
}

SimulatedRow::SimulatedRow(std::string id, Scene scene, std::optional<NoiseSpec> noise)
    : id_(std::move(id)), scene_(std::move(scene)), noise_(std::move(noise)) {
  odometry_.resize(scene_.frame_count());
  for (std::size_t i = 0; i < odometry_.size(); ++i) odometry_[i] = scene_.rail_position(i);
  if (noise_) odometry_ = perturb_odometry(odometry_, *noise_);
}

FrameRecord SimulatedRow::frame(std::size_t index) const {
  if (index >= size()) {
    throw Error(ErrorCode::MissingFile, fmt::format("row {} has {} frames", id_, size()), index);
  }
  FrameRecord f = render_frame(scene_, index);
  if (noise_) f = perturb(f, *noise_);
  f.odometry_distance = odometry_[index];
  return f;
}

namespace {

// True when the image footprints of the two fruits come within `gap` pixels
// of each other anywhere along the rail.
bool footprints_meet(const Fruit& a, const Fruit& b, const Scene& probe, double gap) {
  const Calibration& calib = probe.calibration();
  const Intrinsics& K = calib.intrinsics;
  for (double s = 0.0; s <= probe.spec().rail_length; s += 0.01) {
    const Transform cam = (rail_pose(s) * calib.camera_extrinsics).inverse();
    const Point3 ca = cam(a.center), cb = cam(b.center);
    if (ca.z() <= a.radius || cb.z() <= b.radius) continue;
    const Pixel pa = project(ca, K), pb = project(cb, K);
    const double ra = K.fx * a.radius / std::sqrt(ca.z() * ca.z() - a.radius * a.radius);
    const double rb = K.fx * b.radius / std::sqrt(cb.z() * cb.z() - b.radius * b.radius);
    if (std::hypot(pa.u - pb.u, pa.v - pb.v) < ra + rb + gap) return true;
  }
  return false;
}

}  // namespace

SceneSpec random_scene(const RowLayout& layout, std::uint64_t seed, const Calibration& calibration) {
  if (layout.foreground < 0 || layout.background < 0 ||
      !(layout.rail_length > 2.0 * layout.end_margin) ||
      !(layout.min_radius > 0.0 && layout.min_radius <= layout.max_radius)) {
    throw Error(ErrorCode::InvalidSpec, "inconsistent row layout");
  }
  std::mt19937_64 rng = stream_rng(seed, 0, 0x6c61796f75740000ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const Intrinsics& K = calibration.intrinsics;
  const Point3 camera = calibration.camera_extrinsics.translation();
  const double half_view = (K.height / 2.0) / K.fy;  // vertical half-extent per metre of depth

  SceneSpec spec;
  spec.rail_length = layout.rail_length;
  const Scene probe(spec, calibration);

  auto place = [&](RowTag row) {
    const bool fg = row == RowTag::Foreground;
    for (int attempt = 0; attempt < 2000; ++attempt) {
      Fruit f;
      f.row = row;
      f.radius = uniform(layout.min_radius, layout.max_radius);
      const double depth = fg ? uniform(layout.fg_depth_min, layout.fg_depth_max)
                              : uniform(layout.bg_depth_min, layout.bg_depth_max);
      const double half = std::max(0.0, half_view * depth * layout.height_spread - f.radius);
      f.center = {uniform(layout.end_margin, layout.rail_length - layout.end_margin),
                  camera.y() + depth, camera.z() + uniform(-half, half)};
      if (layout.disjoint_in_image) {
        const bool clash = std::any_of(spec.fruits.begin(), spec.fruits.end(), [&](const Fruit& o) {
          return footprints_meet(f, o, probe, 4.0);
        });
        if (clash) continue;
      }
      spec.fruits.push_back(f);
      return;
    }
    throw Error(ErrorCode::InvalidSpec, "could not place fruit; row too crowded");
  };
  for (int i = 0; i < layout.foreground; ++i) place(RowTag::Foreground);
  for (int i = 0; i < layout.background; ++i) place(RowTag::Background);

  for (int i = 0; i < layout.occluders; ++i) {
    const double depth = uniform(0.3, std::max(0.31, layout.fg_depth_min - 0.05));
    const double x = uniform(0.0, layout.rail_length);
    const double z = camera.z() + uniform(-1.0, 1.0) * half_view * depth * layout.height_spread;
    const double hw = uniform(0.02, 0.05), hh = uniform(0.015, 0.04);
    spec.occluders.push_back({{x - hw, camera.y() + depth, z - hh},
                              {x + hw, camera.y() + depth + 0.01, z + hh}});
  }
  spec.validate();
  return spec;
}

std::vector<SimulatedRow> make_benchmark(const BenchmarkSpec& spec, const Calibration& calibration) {
  if (spec.rows < 1 || spec.foreground_counts.empty()) {
    throw Error(ErrorCode::InvalidSpec, "benchmark needs rows and foreground counts");
  }
  std::vector<SimulatedRow> rows;
  rows.reserve(static_cast<std::size_t>(spec.rows));
  for (int k = 0; k < spec.rows; ++k) {
    RowLayout layout = spec.layout;
    layout.foreground = spec.foreground_counts[static_cast<std::size_t>(k) % spec.foreground_counts.size()];
    layout.background = spec.background_per_row;
    const std::uint64_t row_seed = splitmix64(spec.seed * 1000003ULL + static_cast<std::uint64_t>(k));
    std::optional<NoiseSpec> noise = spec.noise;
    if (noise) noise->seed = splitmix64(row_seed);
    rows.emplace_back(fmt::format("row{:02d}", k),
                      generate_scene(random_scene(layout, row_seed, calibration), calibration),
                      noise);
  }
  return rows;
}

BenchmarkSpec clean_benchmark(int rows, std::uint64_t seed) {
  BenchmarkSpec spec;
  spec.rows = rows;
  spec.seed = seed;
  spec.layout.rail_length = 4.0;
  spec.layout.min_radius = 0.03;
  spec.layout.disjoint_in_image = true;
  spec.foreground_counts = {8};
  spec.background_per_row = 0;
  spec.noise.reset();
  return spec;
}

}  // namespace rowtracker
