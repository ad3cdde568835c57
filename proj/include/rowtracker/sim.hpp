#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "rowtracker/frame.hpp"

namespace rowtracker {

enum class RowTag { Foreground, Background };

/// Spherical fruit. World frame: x along the rail, y away from the rail
/// line (depth for the default rig), z up.
struct Fruit {
  Point3 center = Point3::Zero();
  double radius = 0.04;
  RowTag row = RowTag::Foreground;
};

/// Axis-aligned box in the world frame standing in for a leaf.
struct Box {
  Point3 min = Point3::Zero();
  Point3 max = Point3::Zero();
};

struct SceneSpec {
  std::vector<Fruit> fruits;
  double rail_length = 5.0;  // m
  double speed = 0.2;        // m/s
  double frame_rate = 15.0;  // Hz
  std::vector<Box> occluders;

  /// Throws InvalidSpec. Foreground fruits must have their centre in
  /// [0.2, 1.4] m of rail-line depth; background fruits must have their
  /// nearest surface beyond 1.4 m.
  void validate() const;
};

/// Scene spec file: "rail_length", "speed" and "frame_rate" header lines
/// ("key value"), one fruit per line as "x y z radius fg|bg", and optional
/// occluders as "box xmin ymin zmin xmax ymax zmax". '#' starts a comment.
SceneSpec parse_scene_spec(std::istream& in, const std::string& source = "scene spec");
SceneSpec read_scene_spec(const std::filesystem::path& path);
void write_scene_spec(std::ostream& out, const SceneSpec& spec);

struct NoiseSpec {
  double odometry_sigma = 0.001;     // m per frame, random walk
  double dropout_prob = 0.1;         // per detection per frame
  double false_positive_rate = 0.2;  // expected spurious detections per frame
  int mask_jitter = 2;               // px of erosion/dilation amplitude
  std::uint64_t seed = 0;

  static NoiseSpec none() { return {0.0, 0.0, 0.0, 0, 0}; }
  bool is_zero() const {
    return odometry_sigma == 0.0 && dropout_prob == 0.0 && false_positive_rate == 0.0 &&
           mask_jitter == 0;
  }
  void validate() const;
};

/// Validated scene plus the camera rig that observes it.
class Scene {
 public:
  Scene(SceneSpec spec, Calibration calibration);

  const SceneSpec& spec() const { return spec_; }
  const Calibration& calibration() const { return calibration_; }

  /// Frames at rail positions 0, step, 2 step, ... <= rail_length.
  std::size_t frame_count() const { return frame_count_; }
  double step() const { return spec_.speed / spec_.frame_rate; }
  double rail_position(std::size_t frame_index) const;

  int foreground_count() const;

 private:
  SceneSpec spec_;
  Calibration calibration_;
  std::size_t frame_count_ = 0;
};

/// Validates the scene spec and pairs it with the camera rig.
Scene generate_scene(const SceneSpec& spec, const Calibration& calibration = {});

/// Ray-casts every fruit and occluder at `rail_position`. Depth holds the
/// nearest surface (z-depth); each fruit keeping at least 10% of its full
/// silhouette visible emits a detection whose confidence is that visible
/// fraction.
FrameRecord render_frame(const Scene& scene, double rail_position, std::size_t frame_index);
FrameRecord render_frame(const Scene& scene, std::size_t frame_index);

/// Detection-level noise, deterministic in (seed, frame_index): dropout,
/// boundary jitter and false positives with random in-range depth painted
/// where the depth image has no return. Odometry is left alone; see
/// perturb_odometry.
FrameRecord perturb(const FrameRecord& frame, const NoiseSpec& noise);

/// Random-walk odometry error with per-frame sigma; increments are clamped
/// at zero so the result stays non-decreasing.
std::vector<double> perturb_odometry(std::span<const double> distances, const NoiseSpec& noise);

/// A simulated row rendered lazily, frame by frame.
class SimulatedRow final : public FrameSource {
 public:
  SimulatedRow(std::string id, Scene scene, std::optional<NoiseSpec> noise = std::nullopt);

  std::string id() const override { return id_; }
  std::size_t size() const override { return scene_.frame_count(); }
  FrameRecord frame(std::size_t index) const override;
  const Calibration& calibration() const override { return scene_.calibration(); }
  std::optional<int> gt_count() const override { return scene_.foreground_count(); }

  const Scene& scene() const { return scene_; }

 private:
  std::string id_;
  Scene scene_;
  std::optional<NoiseSpec> noise_;
  std::vector<double> odometry_;
};

/// Parameters of the randomized row generator used for benchmarks.
struct RowLayout {
  int foreground = 20;
  int background = 10;
  double rail_length = 5.0;
  /// Fruits keep this distance from both rail ends so every fruit enters
  /// and leaves the view.
  double end_margin = 0.9;
  double min_radius = 0.02;
  double max_radius = 0.045;
  double fg_depth_min = 0.45;
  double fg_depth_max = 1.1;
  double bg_depth_min = 1.6;
  double bg_depth_max = 2.4;
  /// Fruit heights stay within this fraction of the vertical half-view.
  double height_spread = 0.7;
  int occluders = 0;
  /// Reject placements whose image footprints ever touch another fruit.
  bool disjoint_in_image = false;
};

SceneSpec random_scene(const RowLayout& layout, std::uint64_t seed,
                       const Calibration& calibration = {});

/// Seeded multi-row benchmark. Row k uses foreground_counts[k % size] fruits
/// in front, half as many behind, and its own scene and noise seeds.
struct BenchmarkSpec {
  int rows = 10;
  std::uint64_t seed = 0;
  RowLayout layout;
  /// Mean 20; varied so that R^2 over rows is defined.
  std::vector<int> foreground_counts = {16, 24, 18, 22, 20, 17, 23, 19, 21, 20};
  int background_per_row = 10;
  /// Empty for noise-free rows; the seed field is overridden per row.
  std::optional<NoiseSpec> noise = NoiseSpec{};
};

std::vector<SimulatedRow> make_benchmark(const BenchmarkSpec& spec,
                                         const Calibration& calibration = {});

/// Noise-free rows whose fruits never touch in the image.
BenchmarkSpec clean_benchmark(int rows = 5, std::uint64_t seed = 0);

}  // namespace rowtracker
