#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "rowtracker/error.hpp"
#include "rowtracker/rowmap.hpp"
#include "rowtracker/sim.hpp"
#include "support.hpp"

namespace rowtracker {
namespace {

using testing::small_calibration;

FrameRecord depth_frame(std::size_t index, double odometry, DepthImage depth) {
  FrameRecord f;
  f.frame_index = index;
  f.odometry_distance = odometry;
  f.depth = std::move(depth);
  return f;
}

std::size_t oracle_in_range(const DepthImage& d, double lo, double hi) {
  std::size_t n = 0;
  for (std::uint16_t mm : d.data()) {
    // Integer millimetres against the metre bounds.
    n += mm != 0 && mm >= lo * 1000.0 && mm <= hi * 1000.0;
  }
  return n;
}

TEST(FrameCloud, UniformOneMetreKeepsEveryPixel) {
  const Intrinsics K = small_calibration().intrinsics;
  const PointCloud c = frame_cloud(DepthImage(K.width, K.height, 1000), nullptr, K, MapConfig{});
  ASSERT_EQ(c.size(), static_cast<std::size_t>(K.width) * K.height);
  for (const CloudPoint& p : c.points) ASSERT_EQ(p.position.z(), 1.0);
}

TEST(FrameCloud, UniformTwoMetresIsEmpty) {
  const Intrinsics K = small_calibration().intrinsics;
  EXPECT_EQ(frame_cloud(DepthImage(K.width, K.height, 2000), nullptr, K, MapConfig{}).size(), 0u);
}

TEST(FrameCloud, HalfInRangeKeepsHalf) {
  const Intrinsics K = small_calibration().intrinsics;
  DepthImage d(K.width, K.height, 100);
  for (int v = 0; v < K.height; ++v) {
    for (int u = v % 2; u < K.width; u += 2) d.set_mm(u, v, 1000);
  }
  EXPECT_EQ(frame_cloud(d, nullptr, K, MapConfig{}).size(),
            static_cast<std::size_t>(K.width) * K.height / 2);
}

TEST(FrameCloud, UsesColourWhenGiven) {
  const Intrinsics K = small_calibration().intrinsics;
  ColorImage rgb{K.width, K.height, {}};
  rgb.pixels.assign(static_cast<std::size_t>(K.width) * K.height, Rgb{10, 20, 30});
  const PointCloud c = frame_cloud(DepthImage(K.width, K.height, 700), &rgb, K, MapConfig{});
  ASSERT_FALSE(c.points.empty());
  EXPECT_EQ(c.points[0].color, (Rgb{10, 20, 30}));
  ColorImage wrong{10, 10, {}};
  EXPECT_THROW(frame_cloud(DepthImage(K.width, K.height, 700), &wrong, K, MapConfig{}), Error);
}

TEST(FrameCloud, GreyLevelsFollowDepth) {
  const Intrinsics K = small_calibration().intrinsics;
  DepthImage d(K.width, K.height, 0);
  d.set_mm(0, 0, 200);
  d.set_mm(1, 0, 1400);
  const PointCloud c = frame_cloud(d, nullptr, K, MapConfig{});
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[0].color, (Rgb{255, 255, 255}));
  EXPECT_EQ(c.points[1].color, (Rgb{0, 0, 0}));
}

TEST(FrameCloud, RejectsBadInputs) {
  const Intrinsics K = small_calibration().intrinsics;
  EXPECT_THROW(frame_cloud(DepthImage(10, 10, 1000), nullptr, K, MapConfig{}), Error);
  MapConfig bad;
  bad.skip = 0;
  EXPECT_THROW(frame_cloud(DepthImage(K.width, K.height), nullptr, K, bad), Error);
  bad = MapConfig{};
  bad.d_min = 1.5;
  EXPECT_THROW(frame_cloud(DepthImage(K.width, K.height), nullptr, K, bad), Error);
}

TEST(BuildMap, SingleFrameIsRigidlyPlacedFrameCloud) {
  const Calibration calib = small_calibration();
  const Intrinsics& K = calib.intrinsics;
  DepthImage d(K.width, K.height, 0);
  for (int v = 20; v < 60; ++v) {
    for (int u = 30; u < 90; ++u) d.set_mm(u, v, static_cast<std::uint16_t>(500 + u + v));
  }
  const InMemoryRow row("one", calib, {depth_frame(0, 0.37, d)});
  const PointCloud map = build_map(row, MapConfig{});
  PointCloud expected = frame_cloud(d, nullptr, K, MapConfig{});
  expected.transform(rail_pose(0.37) * calib.camera_extrinsics);
  ASSERT_EQ(map.size(), expected.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    EXPECT_LT((map.points[i].position - expected.points[i].position).norm(), 1e-12);
  }
}

TEST(BuildMap, RailTravelOffsetsSubClouds) {
  const Calibration calib = small_calibration();
  const Intrinsics& K = calib.intrinsics;
  const DepthImage wall(K.width, K.height, 1000);
  const InMemoryRow row("two", calib, {depth_frame(0, 0.0, wall), depth_frame(1, 0.8, wall)});
  MapConfig cfg;
  cfg.skip = 1;
  const PointCloud map = build_map(row, cfg);
  double min0 = 1e9, max0 = -1e9, min1 = 1e9, max1 = -1e9;
  for (const CloudPoint& p : map.points) {
    const double x = p.position.x();
    if (p.source_frame == 0) {
      min0 = std::min(min0, x);
      max0 = std::max(max0, x);
    } else {
      min1 = std::min(min1, x);
      max1 = std::max(max1, x);
    }
  }
  EXPECT_NEAR(min1 - min0, 0.8, 1e-12);
  EXPECT_NEAR(max1 - max0, 0.8, 1e-12);
  // The wall is one metre in front of the camera along platform +y.
  for (const CloudPoint& p : map.points) ASSERT_NEAR(p.position.y(), 1.0, 1e-12);
}

SimulatedRow fifty_frame_row() {
  RowLayout layout;
  layout.rail_length = 49 * 0.2 / 15.0;
  layout.end_margin = 0.0;
  layout.foreground = 4;
  layout.background = 2;
  layout.occluders = 3;
  const Calibration calib = small_calibration();
  return SimulatedRow("fifty", generate_scene(random_scene(layout, 1, calib), calib), NoiseSpec{});
}

TEST(BuildMap, ConservesKeptFramePixels) {
  const SimulatedRow row = fifty_frame_row();
  ASSERT_EQ(row.size(), 50u);
  for (std::size_t skip : {1u, 7u, 60u}) {
    MapConfig cfg;
    cfg.skip = skip;
    std::size_t expected = 0;
    for (std::size_t i = 0; i < row.size(); i += skip) {
      expected += oracle_in_range(row.frame(i).depth, cfg.d_min, cfg.d_max);
    }
    const PointCloud map = build_map(row, cfg);
    EXPECT_EQ(map.size(), expected) << "skip " << skip;
    for (const CloudPoint& p : map.points) {
      ASSERT_GE(p.source_depth, cfg.d_min);
      ASSERT_LE(p.source_depth, cfg.d_max);
      ASSERT_EQ(p.source_frame % skip, 0u);
      ASSERT_TRUE(p.position.allFinite());
    }
  }
}

TEST(BuildMap, TranslatingPosesTranslatesMap) {
  const SimulatedRow row = fifty_frame_row();
  MapConfig cfg;
  cfg.skip = 10;
  const PointCloud base = build_map(row, cfg);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> t(-50.0, 50.0);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::Vector3d shift(t(rng), t(rng), t(rng));
    const PointCloud moved = build_map(row, cfg, Transform::from_translation(shift));
    ASSERT_EQ(moved.size(), base.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      worst = std::max(worst, (moved.points[i].position - base.points[i].position - shift).norm());
    }
    EXPECT_LT(worst, 1e-9);
  }
}

TEST(BuildMap, InvalidCalibrationIsMissingCalibration) {
  Calibration bad = small_calibration();
  bad.intrinsics.fx = 0.0;
  const InMemoryRow row("r", small_calibration(), {});
  try {
    build_map(row, MapConfig{}, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingCalibration);
  }
}

TEST(Ply, EmptyCloudHasZeroVertices) {
  std::ostringstream out;
  write_ply(out, PointCloud{});
  EXPECT_EQ(out.str(),
            "ply\nformat ascii 1.0\nelement vertex 0\nproperty double x\nproperty double y\n"
            "property double z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\n"
            "end_header\n");
}

TEST(Ply, BodyLineFormat) {
  PointCloud c;
  CloudPoint p;
  p.position = {1.0, 2.0, 3.0};
  c.points.push_back(p);
  std::ostringstream out;
  write_ply(out, c);
  const std::string s = out.str();
  EXPECT_EQ(s.substr(s.find("end_header\n") + 11), "1.000000 2.000000 3.000000 255 255 255\n");
}

PointCloud random_cloud(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> x(-10.0, 10.0);
  std::uniform_int_distribution<int> c(0, 255);
  PointCloud cloud;
  for (std::size_t i = 0; i < n; ++i) {
    CloudPoint p;
    p.position = {x(rng), x(rng), x(rng)};
    p.color = {static_cast<std::uint8_t>(c(rng)), static_cast<std::uint8_t>(c(rng)),
               static_cast<std::uint8_t>(c(rng))};
    cloud.points.push_back(p);
  }
  return cloud;
}

using Key = std::tuple<double, double, double, int, int, int>;

std::vector<Key> multiset(const PointCloud& c, bool round6) {
  auto r = [&](double v) { return round6 ? std::round(v * 1e6) / 1e6 : v; };
  std::vector<Key> keys;
  for (const CloudPoint& p : c.points) {
    keys.emplace_back(r(p.position.x()), r(p.position.y()), r(p.position.z()), p.color[0],
                      p.color[1], p.color[2]);
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

TEST(Ply, AsciiRoundTripKeepsSixDecimals) {
  const PointCloud c = random_cloud(5, 500);
  std::stringstream ss;
  write_ply(ss, c);
  const PointCloud back = read_ply(ss);
  EXPECT_EQ(multiset(back, true), multiset(c, true));
}

TEST(Ply, BinaryRoundTripIsExact) {
  const PointCloud c = random_cloud(6, 500);
  std::stringstream ss;
  write_ply(ss, c, PlyFormat::BinaryLittleEndian);
  const PointCloud back = read_ply(ss);
  EXPECT_EQ(multiset(back, false), multiset(c, false));
}

TEST(Ply, FileWriteAndTruncatedInput) {
  const auto dir = testing::scratch_dir("ply");
  const PointCloud c = random_cloud(7, 20);
  write_ply(dir / "map.ply", c);
  std::istringstream in(testing::slurp(dir / "map.ply"));
  EXPECT_EQ(read_ply(in).size(), 20u);
  EXPECT_FALSE(std::filesystem::exists(dir / "map.ply.tmp"));
  std::istringstream cut("ply\nformat ascii 1.0\nelement vertex 2\nend_header\n1 2 3 4 5 6\n");
  EXPECT_THROW(read_ply(cut), Error);
  std::istringstream junk("hello\n");
  EXPECT_THROW(read_ply(junk), Error);
}

}  // namespace
}  // namespace rowtracker
