#include "oracles.hpp"
#include "voxsurf/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

using namespace voxsurf;

namespace {

NeighborhoodStats stats_of(const std::vector<Vec3>& pts, int level = 1) {
  NeighborhoodStats h;
  h.level = level;
  for (const auto& p : pts) h.stats.add(p);
  return h;
}

std::vector<Vec3> plane_samples(std::mt19937_64& rng, int n, double noise) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, noise > 0 ? noise : 1.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), noise > 0 ? g(rng) : 0.0);
  return pts;
}

void expect_valid_decomposition(const Mat3& m, const SymmetricEigen& e) {
  const double tol = 1e-6 * std::max(1.0, m.norm());
  EXPECT_GE(e.values[0], e.values[1]);
  EXPECT_GE(e.values[1], e.values[2]);
  EXPECT_LE((e.vectors.transpose() * e.vectors - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-7);
  for (int i = 0; i < 3; ++i)
    EXPECT_LE((m * e.vectors.col(i) - e.values[i] * e.vectors.col(i)).norm(), tol);
  EXPECT_LE((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - m).cwiseAbs().maxCoeff(), tol);
}

}  // namespace

TEST(Eigen3, Identity) {
  const auto e = eigen3_symmetric(Mat3::Identity());
  EXPECT_TRUE(e.values.isApprox(Vec3(1, 1, 1)));
  expect_valid_decomposition(Mat3::Identity(), e);
}

TEST(Eigen3, Diagonal) {
  const Mat3 m = Vec3(1, 3, 2).asDiagonal();
  const auto e = eigen3_symmetric(m);
  EXPECT_NEAR(e.values[0], 3.0, 1e-12);
  EXPECT_NEAR(e.values[1], 2.0, 1e-12);
  EXPECT_NEAR(e.values[2], 1.0, 1e-12);
  EXPECT_NEAR(std::abs(e.vectors(1, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(e.vectors(2, 1)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(e.vectors(0, 2)), 1.0, 1e-12);
}

TEST(Eigen3, ZeroMatrix) {
  const auto e = eigen3_symmetric(Mat3::Zero());
  EXPECT_EQ(e.values, Vec3::Zero());
  expect_valid_decomposition(Mat3::Zero(), e);
}

TEST(Eigen3, RandomPsdReconstructsAndAgreesWithReferenceSolver) {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    Mat3 a;
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = n(rng);
    const Mat3 m = a * a.transpose();
    const auto e = eigen3_symmetric(m);
    expect_valid_decomposition(m, e);
    Eigen::SelfAdjointEigenSolver<Mat3> ref(m);
    EXPECT_LE((e.values.reverse() - ref.eigenvalues()).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, m.norm()));
  }
}

TEST(Eigen3, RepeatedAndNearRepeatedSpectra) {
  std::mt19937_64 rng(7);
  for (const Vec3 spectrum : {Vec3(2, 2, 1), Vec3(5, 1, 1), Vec3(1, 1 - 1e-9, 1e-3), Vec3(1e-4, 1e-8, 1e-8),
                              Vec3(1, 0, 0), Vec3(3, 3, 3)}) {
    const Mat3 r = oracle::random_rotation(rng);
    const Mat3 m = r * spectrum.asDiagonal() * r.transpose();
    const auto e = eigen3_symmetric(m);
    expect_valid_decomposition(m, e);
  }
}

TEST(Eigen3, NonFiniteInputIsAnError) {
  Mat3 m = Mat3::Identity();
  m(0, 1) = m(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(eigen3_symmetric(m), NumericError);
}

TEST(FitPlane, HorizontalPlaneSensorAbove) {
  std::mt19937_64 rng(1);
  const auto plane = fit_plane(stats_of(plane_samples(rng, 100, 0.0)), Vec3(0, 0, 10), 10);
  ASSERT_TRUE(plane);
  EXPECT_NEAR(plane->normal.z(), 1.0, 1e-12);
  EXPECT_NEAR(plane->eigvals[2], 0.0, 1e-15);
}

TEST(FitPlane, HorizontalPlaneSensorBelowFlipsNormal) {
  std::mt19937_64 rng(1);
  const auto plane = fit_plane(stats_of(plane_samples(rng, 100, 0.0)), Vec3(0, 0, -10), 10);
  ASSERT_TRUE(plane);
  EXPECT_NEAR(plane->normal.z(), -1.0, 1e-12);
}

TEST(FitPlane, NoisyTiltedPlaneWithinTwoDegreesOfLeastSquares) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, 0.01);
  const Vec3 n = Vec3(1, 1, 1).normalized();
  const Vec3 t1 = Vec3(1, -1, 0).normalized(), t2 = n.cross(t1);
  std::vector<Vec3> pts;
  for (int i = 0; i < 200; ++i) pts.push_back(n / std::sqrt(3.0) + u(rng) * t1 + u(rng) * t2 + g(rng) * n);
  const auto plane = fit_plane(stats_of(pts), Vec3(5, 5, 5), 10);
  ASSERT_TRUE(plane);
  EXPECT_LT(oracle::angle_deg(plane->normal, oracle::lsq_plane_normal(pts)), 1e-6);
  EXPECT_LT(oracle::angle_deg(plane->normal, n), 2.0);
  EXPECT_GT(plane->normal.dot(n), 0.0);
}

TEST(FitPlane, RejectsBelowMinimumSupport) {
  std::mt19937_64 rng(1);
  const auto h = stats_of(plane_samples(rng, 9, 0.0));
  EXPECT_FALSE(fit_plane(h, Vec3(0, 0, 1), 10));
  EXPECT_TRUE(fit_plane(h, Vec3(0, 0, 1), 9));
  EXPECT_FALSE(fit_plane(NeighborhoodStats{}, Vec3(0, 0, 1), 0));
}

TEST(FitPlane, TieKeepsSmallestEigenvector) {
  // sensor lies in the plane through the center: e3 . (s - mu) == 0
  NeighborhoodStats h;
  h.stats = VoxelStats::from_moments(30, Vec3(1, 2, 3), Vec3(2.0, 1.0, 0.01).asDiagonal());
  const Vec3 e3 = eigen3_symmetric(h.cov()).vectors.col(2);
  ASSERT_EQ(e3.x(), 0.0);
  const auto plane = fit_plane(h, Vec3(4, 2, 3), 10);
  ASSERT_TRUE(plane);
  EXPECT_EQ(plane->normal, e3);
}

TEST(FitPlane, CorruptCovarianceIsAnError) {
  NeighborhoodStats h;
  h.stats = VoxelStats::from_moments(20, Vec3::Zero(), Vec3(1.0, 0.5, -1e-3).asDiagonal());
  EXPECT_THROW(fit_plane(h, Vec3(0, 0, 1), 10), NumericError);
  h.stats = VoxelStats::from_moments(20, Vec3::Zero(), Vec3(1.0, 0.5, -1e-10).asDiagonal());
  const auto plane = fit_plane(h, Vec3(0, 0, 1), 10);
  ASSERT_TRUE(plane);
  EXPECT_EQ(plane->eigvals[2], 0.0);
}

TEST(FitPlane, CollinearPointsStillReturnAnEstimate) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 20; ++i) pts.emplace_back(0.1 * i, 0.0, 0.0);
  const auto plane = fit_plane(stats_of(pts), Vec3(0, 0, 5), 10);
  ASSERT_TRUE(plane);
  EXPECT_NEAR(plane->normal.norm(), 1.0, 1e-9);
  EXPECT_NEAR(plane->normal.x(), 0.0, 1e-9);
}

TEST(FitPlaneProperties, RotationEquivariance) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 60; ++i) pts.emplace_back(2.0 * g(rng), 1.0 * g(rng), 0.1 * g(rng));
    const Mat3 r = oracle::random_rotation(rng);
    std::vector<Vec3> rotated;
    for (const auto& p : pts) rotated.push_back(r * p);
    const Vec3 sensor(0.3, -0.2, 5.0);
    const auto a = fit_plane(stats_of(pts), sensor, 10);
    const auto b = fit_plane(stats_of(rotated), r * sensor, 10);
    ASSERT_TRUE(a && b);
    EXPECT_LE((r * a->normal - b->normal).norm(), 1e-6);
  }
}

TEST(FitPlaneProperties, ScaleAboutCenterKeepsNormal) {
  std::mt19937_64 rng(78);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 40; ++i) pts.emplace_back(1.0 + g(rng), 2.0 + 0.7 * g(rng), 0.05 * g(rng));
    const Vec3 c = oracle::batch_stats(pts).mean;
    const Vec3 sensor(1.0, 2.0, 3.0);
    const auto a = fit_plane(stats_of(pts), sensor, 10);
    for (double scale : {0.01, 0.5, 7.0}) {
      std::vector<Vec3> scaled;
      for (const auto& p : pts) scaled.push_back(c + scale * (p - c));
      const auto b = fit_plane(stats_of(scaled), sensor, 10);
      ASSERT_TRUE(a && b);
      EXPECT_LE((a->normal - b->normal).norm(), 1e-6);
    }
  }
}

TEST(FitPlaneProperties, NormalAlwaysFacesSensor) {
  std::mt19937_64 rng(79);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    std::vector<Vec3> pts;
    const Mat3 r = oracle::random_rotation(rng);
    for (int i = 0; i < 15; ++i) pts.push_back(r * Vec3(g(rng), g(rng), 0.2 * g(rng)));
    const Vec3 sensor(5 * g(rng), 5 * g(rng), 5 * g(rng));
    const auto plane = fit_plane(stats_of(pts), sensor, 10);
    ASSERT_TRUE(plane);
    EXPECT_GE(plane->normal.dot(sensor - plane->center), 0.0);
    EXPECT_NEAR(plane->normal.norm(), 1.0, 1e-9);
    EXPECT_NEAR(std::abs(plane->normal.dot(plane->eigvecs.col(2))), 1.0, 1e-9);
  }
}
