#include "voxsurf/synth.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace voxsurf;

namespace {

ScannerSpec single_ring(double elevation_deg, int steps, const Vec3& origin = Vec3(0, 0, 1.73)) {
  ScannerSpec s;
  s.origin = origin;
  s.layers = 1;
  s.fov_min_deg = s.fov_max_deg = elevation_deg;
  s.horizontal_steps = steps;
  return s;
}

Scene ground_only() {
  Scene s;
  s.primitives.push_back(GroundPlane{0.0});
  return s;
}

}  // namespace

TEST(Synth, FlatGroundRingHasAnalyticRange) {
  const auto cloud = scan(ground_only(), single_ring(-10.0, 4), 0);
  ASSERT_EQ(cloud.points.size(), 4u);
  const double range = 1.73 / std::sin(10.0 * std::numbers::pi / 180.0);
  for (const auto& p : cloud.points) {
    EXPECT_NEAR(p.z(), 0.0, 1e-12);
    EXPECT_NEAR((p - cloud.sensor_pose).norm(), range, 1e-12);
  }
  EXPECT_NEAR(cloud.points[0].y(), 0.0, 1e-12);
  EXPECT_GT(cloud.points[0].x(), 0.0);
}

TEST(Synth, PrimitiveRangesAreExact) {
  Scene s;
  s.primitives.push_back(Sphere{Vec3(0, 0, -5), 1.0});
  const auto down = scan(s, single_ring(-90.0, 1, Vec3::Zero()), 0);
  ASSERT_EQ(down.points.size(), 1u);
  EXPECT_NEAR(down.points[0].z(), -4.0, 1e-12);

  Scene mixed;
  mixed.primitives.push_back(Sphere{Vec3(10, 0, 0), 2.0});
  mixed.primitives.push_back(Box{Vec3(-6, -1, -1), Vec3(-4, 1, 1)});
  mixed.primitives.push_back(Cylinder{Vec3(0, 7, -1), 0.5, 2.0});
  const auto ring = scan(mixed, single_ring(0.0, 4, Vec3::Zero()), 0);
  ASSERT_EQ(ring.points.size(), 3u);  // -y direction has nothing
  EXPECT_NEAR((ring.points[0] - Vec3(8, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((ring.points[1] - Vec3(0, 6.5, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((ring.points[2] - Vec3(-4, 0, 0)).norm(), 0.0, 1e-12);
}

TEST(Synth, RaysBeyondRangeAreDropped) {
  auto spec = single_ring(-2.0, 8);
  spec.range_max = 10.0;  // ground hit at ~49.6 m
  EXPECT_TRUE(scan(ground_only(), spec, 0).points.empty());
}

TEST(Synth, NoiseStandardDeviation) {
  auto spec = single_ring(-30.0, 20000);
  spec.noise_sigma = 0.01;
  const auto cloud = scan(ground_only(), spec, 4);
  ASSERT_EQ(cloud.points.size(), 20000u);
  const double truth = 1.73 / std::sin(std::numbers::pi / 6.0);
  double sum = 0.0, sum2 = 0.0;
  for (const auto& p : cloud.points) {
    const double r = (p - cloud.sensor_pose).norm() - truth;
    sum += r;
    sum2 += r * r;
  }
  const double n = static_cast<double>(cloud.points.size());
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  EXPECT_NEAR(sd, 0.01, 0.002);
  EXPECT_NEAR(mean, 0.0, 0.001);
}

TEST(Synth, AzimuthSpacingMatchesStepCount) {
  const int steps = 90;
  const auto cloud = scan(ground_only(), single_ring(-15.0, steps), 0);
  ASSERT_EQ(cloud.points.size(), static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const Vec3 d = cloud.points[i] - cloud.sensor_pose;
    const double az = std::atan2(d.y(), d.x());
    const double want = std::remainder(2.0 * std::numbers::pi * i / steps, 2.0 * std::numbers::pi);
    EXPECT_NEAR(std::remainder(az - want, 2.0 * std::numbers::pi), 0.0, 1e-12);
  }
}

TEST(Synth, LayerElevationsSpanFieldOfView) {
  ScannerSpec s;
  EXPECT_DOUBLE_EQ(s.elevation_deg(0), -24.8);
  EXPECT_DOUBLE_EQ(s.elevation_deg(63), 2.0);
  const auto dense = dense_scanner(s);
  EXPECT_EQ(dense.layers, 316);
  EXPECT_EQ(dense.horizontal_steps, 3600);
  EXPECT_EQ(dense.noise_sigma, 0.0);
}

TEST(Synth, DenseScanHasMorePoints) {
  ScannerSpec sparse;
  sparse.layers = 8;
  sparse.horizontal_steps = 90;
  ScannerSpec dense = sparse;
  dense.layers = 32;
  dense.horizontal_steps = 360;
  const auto scene = default_scene();
  EXPECT_GE(ground_truth_cloud(scene, dense).points.size(), scan(scene, sparse, 1).points.size());
}

TEST(Synth, NoiseFreePointsLieOnSurfaces) {
  ScannerSpec spec;
  spec.layers = 16;
  spec.horizontal_steps = 360;
  const auto scene = default_scene();
  const auto cloud = scan(scene, spec, 0);
  ASSERT_GT(cloud.points.size(), 1000u);
  for (const auto& p : cloud.points) EXPECT_LE(scene_distance(scene, p), 1e-9);
}

TEST(Synth, SeededScansAreReproducible) {
  ScannerSpec spec;
  spec.layers = 8;
  spec.horizontal_steps = 200;
  spec.noise_sigma = 0.02;
  const auto scene = default_scene();
  const auto a = scan(scene, spec, 123), b = scan(scene, spec, 123), c = scan(scene, spec, 124);
  EXPECT_EQ(a.points, b.points);
  EXPECT_NE(a.points, c.points);
}

TEST(Synth, InvalidInputs) {
  ScannerSpec noisy;
  noisy.noise_sigma = 0.01;
  EXPECT_THROW(ground_truth_cloud(default_scene(), noisy), ConfigError);
  Scene bad;
  bad.primitives.push_back(Sphere{Vec3::Zero(), -1.0});
  EXPECT_THROW(scan(bad, ScannerSpec{}, 0), ConfigError);
  ScannerSpec none;
  none.layers = 0;
  EXPECT_THROW(scan(default_scene(), none, 0), ConfigError);
}
