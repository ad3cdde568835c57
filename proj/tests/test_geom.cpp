#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "rowtracker/error.hpp"
#include "rowtracker/geom.hpp"
#include "support.hpp"

namespace rowtracker {
namespace {

using testing::k600;

Transform random_transform(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> t(-2.0, 2.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return {q.toRotationMatrix(), Eigen::Vector3d(t(rng), t(rng), t(rng))};
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no rowtracker::Error thrown";
  return ErrorCode::UsageError;
}

TEST(Project, PrincipalRayHitsPrincipalPoint) {
  const Pixel px = project({0.0, 0.0, 1.0}, k600());
  EXPECT_DOUBLE_EQ(px.u, 640.0);
  EXPECT_DOUBLE_EQ(px.v, 360.0);
}

TEST(Project, OffAxisPoint) {
  // 600 * 0.2 + 640 = 760, 600 * 0.4 + 360 = 600.
  const Pixel px = project({0.2, 0.4, 1.0}, k600());
  EXPECT_DOUBLE_EQ(px.u, 760.0);
  EXPECT_DOUBLE_EQ(px.v, 600.0);
}

TEST(Project, RejectsNonPositiveDepth) {
  EXPECT_EQ(code_of([] { project({0.0, 0.0, 0.0}, k600()); }), ErrorCode::NonPositiveDepth);
  EXPECT_EQ(code_of([] { project({0.1, 0.0, -1.0}, k600()); }), ErrorCode::NonPositiveDepth);
}

TEST(BackProject, PrincipalPointAndOffAxis) {
  const Point3 a = back_project({640.0, 360.0}, 1.0, k600());
  EXPECT_DOUBLE_EQ(a.x(), 0.0);
  EXPECT_DOUBLE_EQ(a.y(), 0.0);
  EXPECT_DOUBLE_EQ(a.z(), 1.0);
  const Point3 b = back_project({760.0, 600.0}, 1.0, k600());
  EXPECT_NEAR(b.x(), 0.2, 1e-15);
  EXPECT_NEAR(b.y(), 0.4, 1e-15);
  EXPECT_DOUBLE_EQ(b.z(), 1.0);
}

TEST(BackProject, RejectsZeroDepth) {
  EXPECT_EQ(code_of([] { back_project({100.0, 100.0}, 0.0, k600()); }),
            ErrorCode::NonPositiveDepth);
}

TEST(BackProject, RoundTripProperty) {
  std::mt19937_64 rng(11);
  const Intrinsics K = k600();
  std::uniform_real_distribution<double> u(0.0, K.width), v(0.0, K.height), d(0.05, 20.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Pixel px{u(rng), v(rng)};
    const Pixel back = project(back_project(px, d(rng), K), K);
    worst = std::max({worst, std::fabs(back.u - px.u), std::fabs(back.v - px.v)});
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Intrinsics, ValidateAndContains) {
  EXPECT_NO_THROW(Intrinsics{}.validate());
  Intrinsics bad;
  bad.fx = 0.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::InvalidConfig);
  Intrinsics off;
  off.cx = 1280.0;
  EXPECT_EQ(code_of([&] { off.validate(); }), ErrorCode::InvalidConfig);
  const Intrinsics K;
  EXPECT_TRUE(K.contains({0.0, 0.0}));
  EXPECT_TRUE(K.contains({1279.9, 719.9}));
  EXPECT_FALSE(K.contains({1280.0, 10.0}));
  EXPECT_FALSE(K.contains({-0.1, 10.0}));
}

TEST(TransformInvariants, InverseComposesToIdentity) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Transform t = random_transform(rng);
    ASSERT_TRUE(t.is_valid());
    const Transform id = t * t.inverse();
    EXPECT_LT((id.rotation() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT(id.translation().cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(TransformInvariants, NonOrthonormalRotationIsInvalid) {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  r(0, 0) = 1.01;
  EXPECT_FALSE(Transform(r, Eigen::Vector3d::Zero()).is_valid());
  Eigen::Matrix3d mirror = Eigen::Matrix3d::Identity();
  mirror(2, 2) = -1.0;
  EXPECT_FALSE(Transform(mirror, Eigen::Vector3d::Zero()).is_valid());
}

TEST(CameraMotion, IdentityPlatformMotionGivesIdentity) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Transform tc = camera_motion(Transform::identity(), random_transform(rng));
    EXPECT_LT((tc.rotation() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(tc.translation().cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CameraMotion, IdentityExtrinsicsPassesMotionThrough) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const Transform te = random_transform(rng);
    const Transform tc = camera_motion(te, Transform::identity());
    EXPECT_LT((tc.rotation() - te.rotation()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((tc.translation() - te.translation()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CameraMotion, YawedCameraRotatesTranslation) {
  const Transform tec = yaw(M_PI / 2.0);
  const Transform te = Transform::from_translation({0.1, 0.0, 0.0});
  const Transform tc = camera_motion(te, tec);
  using testing::Mat4;
  const Mat4 oracle = testing::mat_mul(testing::mat_inverse(testing::to_mat4(tec)),
                                       testing::mat_mul(testing::to_mat4(te),
                                                        testing::to_mat4(tec)));
  EXPECT_LT(testing::max_abs_diff(testing::to_mat4(tc), oracle), 1e-12);
  // Platform +x is camera -y under a +90 degree yaw of the camera.
  EXPECT_NEAR(tc.translation().x(), 0.0, 1e-12);
  EXPECT_NEAR(tc.translation().y(), -0.1, 1e-12);
  EXPECT_NEAR(tc.translation().z(), 0.0, 1e-12);
}

TEST(CameraMotion, MatchesHomogeneousOracle) {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Transform te = random_transform(rng);
    const Transform tec = random_transform(rng);
    const auto oracle = testing::mat_mul(testing::mat_inverse(testing::to_mat4(tec)),
                                         testing::mat_mul(testing::to_mat4(te),
                                                          testing::to_mat4(tec)));
    worst = std::max(worst, testing::max_abs_diff(testing::to_mat4(camera_motion(te, tec)), oracle));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(CameraMotion, CompositionMatchesHomogeneousOracle) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const Transform a = random_transform(rng);
    const Transform b = random_transform(rng);
    const auto oracle = testing::mat_mul(testing::to_mat4(a), testing::to_mat4(b));
    EXPECT_LT(testing::max_abs_diff(testing::to_mat4(a * b), oracle), 1e-9);
  }
}

TEST(RailMotion, IsNegativeTranslationAlongRail) {
  const Transform te = rail_motion(0.25, 0.35);
  EXPECT_TRUE(te.rotation().isIdentity(0.0));
  EXPECT_NEAR(te.translation().x(), -0.1, 1e-15);
  EXPECT_EQ(te.translation().y(), 0.0);
  EXPECT_EQ(te.translation().z(), 0.0);
  // A world point seen from pose i maps to its coordinates seen from pose j.
  const Point3 world(1.0, 2.0, 0.5);
  const Point3 in_i = rail_pose(0.25).inverse()(world);
  const Point3 in_j = rail_pose(0.35).inverse()(world);
  EXPECT_LT((te(in_i) - in_j).norm(), 1e-12);
}

TEST(Reproject, IdentityKeepsValidDepthPixels) {
  const Intrinsics K = k600();
  const Mask mask = Mask::rectangle(K.width, K.height, {600, 300, 700, 400});
  DepthImage depth(K.width, K.height, 0);
  for (int v = 0; v < K.height; ++v) {
    for (int u = 650; u < K.width; ++u) depth.set_mm(u, v, 1000);
  }
  const Mask out = reproject_mask(mask, depth, Transform::identity(), K);
  EXPECT_EQ(out, Mask::rectangle(K.width, K.height, {650, 300, 700, 400}));
}

TEST(Reproject, TranslationShiftsByFocalTimesTranslationOverDepth) {
  const Intrinsics K = k600();
  const Mask mask = Mask::rectangle(K.width, K.height, {600, 300, 700, 400});
  const DepthImage depth(K.width, K.height, 1000);
  // Camera moves +0.1 m along its x axis: points move -0.1 m in camera coords.
  const Transform tc = camera_motion(rail_motion(0.0, 0.1), Transform::identity());
  const Mask out = reproject_mask(mask, depth, tc, K);
  const auto [u0, v0] = mask.centroid();
  const auto [u1, v1] = out.centroid();
  EXPECT_NEAR(u1 - u0, -60.0, 1.0);
  EXPECT_NEAR(v1 - v0, 0.0, 1e-12);
  // Per-pixel oracle: u' = fx (x - t) / d + cx = u - 60 exactly.
  EXPECT_EQ(out, Mask::rectangle(K.width, K.height, {540, 300, 640, 400}));
}

TEST(Reproject, MotionPushingMaskOffImageGivesEmptyMask) {
  const Intrinsics K = k600();
  const Mask mask = Mask::rectangle(K.width, K.height, {0, 300, 20, 340});
  const DepthImage depth(K.width, K.height, 1000);
  const Mask out = reproject_mask(mask, depth, Transform::from_translation({-0.1, 0.0, 0.0}), K);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(out.width(), K.width);
  EXPECT_EQ(out.height(), K.height);
}

TEST(Reproject, RejectsMismatchedDepth) {
  const Intrinsics K = k600();
  const Mask mask = Mask::rectangle(K.width, K.height, {0, 0, 5, 5});
  const DepthImage depth(640, 480, 1000);
  EXPECT_EQ(code_of([&] { reproject_mask(mask, depth, Transform::identity(), K); }),
            ErrorCode::DimensionMismatch);
}

TEST(Reproject, IdentityPreservesCountWithinClosingDelta) {
  const Intrinsics K = k600();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> cu(100.0, 1180.0), cv(100.0, 620.0), r(3.0, 60.0);
  std::uniform_int_distribution<int> mm(300, 3000);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint8_t> dense(static_cast<std::size_t>(K.width) * K.height, 0);
    for (int k = 0; k < 3; ++k) {
      const Mask d = Mask::disk(K.width, K.height, cu(rng), cv(rng), r(rng));
      d.for_each([&](int u, int v) { dense[static_cast<std::size_t>(v) * K.width + u] = 1; });
    }
    const Mask mask = Mask::from_dense(K.width, K.height, dense);
    const DepthImage depth(K.width, K.height, static_cast<std::uint16_t>(mm(rng)));
    const Mask out = reproject_mask(mask, depth, Transform::identity(), K);
    const double delta = std::fabs(static_cast<double>(out.count()) - mask.count());
    EXPECT_LE(delta, 0.05 * mask.count());
    // Closing only adds pixels.
    EXPECT_EQ(intersection_count(out, mask), mask.count());
  }
}

TEST(Rasterize, RoundsToNearestPixel) {
  const Intrinsics K = k600();
  std::vector<Eigen::Vector3f> pts = {{0.0f, 0.0f, 1.0f}};
  const Mask m = rasterize_points(pts, K);
  EXPECT_EQ(m.count(), 1u);
  EXPECT_TRUE(m.at(640, 360));
  std::vector<Eigen::Vector3f> behind = {{0.0f, 0.0f, -1.0f}};
  EXPECT_TRUE(rasterize_points(behind, K).empty());
}

TEST(CalibrationIo, RoundTrip) {
  Calibration c;
  c.intrinsics = Intrinsics{612.25, 611.5, 321.0, 239.75, 640, 480};
  c.camera_extrinsics = yaw(0.3) * Transform::from_translation({0.1, -0.2, 1.3});
  std::stringstream ss;
  write_calibration(ss, c);
  const Calibration back = parse_calibration(ss);
  EXPECT_EQ(back.intrinsics.fx, c.intrinsics.fx);
  EXPECT_EQ(back.intrinsics.fy, c.intrinsics.fy);
  EXPECT_EQ(back.intrinsics.cx, c.intrinsics.cx);
  EXPECT_EQ(back.intrinsics.cy, c.intrinsics.cy);
  EXPECT_EQ(back.intrinsics.width, 640);
  EXPECT_EQ(back.intrinsics.height, 480);
  EXPECT_EQ(back.camera_extrinsics.rotation(), c.camera_extrinsics.rotation());
  EXPECT_EQ(back.camera_extrinsics.translation(), c.camera_extrinsics.translation());
}

TEST(CalibrationIo, MissingFileAndBadRotation) {
  EXPECT_EQ(code_of([] { read_calibration("/nonexistent/calibration.txt"); }),
            ErrorCode::MissingCalibration);
  std::stringstream ss("fx = 600\nfy = 600\ncx = 320\ncy = 240\nwidth = 640\nheight = 480\n"
                       "T_ec = 2 0 0 0 1 0 0 0 1 0 0 0\n");
  EXPECT_EQ(code_of([&] { parse_calibration(ss); }), ErrorCode::InvalidConfig);
}

}  // namespace
}  // namespace rowtracker
