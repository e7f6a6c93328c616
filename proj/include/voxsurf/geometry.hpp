#pragma once

#include "voxsurf/core.hpp"
#include "voxsurf/grid.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>

namespace voxsurf {

/// Eigen-decomposition of a symmetric 3x3 matrix. values[0] >= values[1] >=
/// values[2]; vectors.col(i) is the unit eigenvector for values[i].
struct SymmetricEigen {
  Vec3 values = Vec3::Zero();
  Mat3 vectors = Mat3::Identity();
};

namespace detail {

inline void sort_descending(SymmetricEigen& e) {
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) { return e.values[a] > e.values[b]; });
  SymmetricEigen sorted;
  for (int i = 0; i < 3; ++i) {
    sorted.values[i] = e.values[order[i]];
    sorted.vectors.col(i) = e.vectors.col(order[i]);
  }
  e = sorted;
}

/// Cyclic Jacobi rotations. Slow but robust for repeated eigenvalues.
inline SymmetricEigen jacobi_eigen(const Mat3& m) {
  Mat3 a = m;
  Mat3 v = Mat3::Identity();
  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    const double diag = a(0, 0) * a(0, 0) + a(1, 1) * a(1, 1) + a(2, 2) * a(2, 2);
    if (off <= 1e-32 * diag || off == 0.0) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Mat3 rot = Mat3::Identity();
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        a = rot.transpose() * a * rot;
        v = v * rot;
        a(p, q) = a(q, p) = 0.0;
      }
    }
  }
  SymmetricEigen e;
  e.values = a.diagonal();
  e.vectors = v;
  sort_descending(e);
  return e;
}

/// Unit vector spanning the null space of a rank-2 matrix: the longest
/// cross product of two of its rows.
inline Vec3 null_vector(const Mat3& a) {
  const Vec3 r0 = a.row(0), r1 = a.row(1), r2 = a.row(2);
  const Vec3 c01 = r0.cross(r1), c02 = r0.cross(r2), c12 = r1.cross(r2);
  const double n01 = c01.squaredNorm(), n02 = c02.squaredNorm(), n12 = c12.squaredNorm();
  if (n01 >= n02 && n01 >= n12) return c01 / std::sqrt(n01);
  if (n02 >= n12) return c02 / std::sqrt(n02);
  return c12 / std::sqrt(n12);
}

}  // namespace detail

/// Symmetric 3x3 eigensolver: closed-form trigonometric eigenvalues with
/// cross-product eigenvectors; falls back to Jacobi when the spectrum is
/// (nearly) repeated or the closed form leaves a residual.
inline SymmetricEigen eigen3_symmetric(const Mat3& input) {
  const Mat3 m = 0.5 * (input + input.transpose());
  if (!m.allFinite()) throw NumericError("eigen3_symmetric: non-finite matrix");
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return {};

  const Mat3 a = m / scale;
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  const double q = a.trace() / 3.0;
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                    (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  if (p < 1e-12) return detail::jacobi_eigen(m);

  const Mat3 b = (a - q * Mat3::Identity()) / p;
  const double r = std::clamp(b.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double l1 = q + 2.0 * p * std::cos(phi);
  const double l3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double l2 = 3.0 * q - l1 - l3;

  // gaps below this make cross-product eigenvectors inaccurate
  constexpr double kGap = 1e-4;
  if (l1 - l2 < kGap * p || l2 - l3 < kGap * p) return detail::jacobi_eigen(m);

  SymmetricEigen e;
  const Vec3 v1 = detail::null_vector(a - l1 * Mat3::Identity());
  Vec3 v3 = detail::null_vector(a - l3 * Mat3::Identity());
  v3 = (v3 - v3.dot(v1) * v1).normalized();
  const Vec3 v2 = v3.cross(v1);
  e.vectors.col(0) = v1;
  e.vectors.col(1) = v2;
  e.vectors.col(2) = v3;
  // Rayleigh quotients are more accurate than the trigonometric roots
  for (int i = 0; i < 3; ++i) e.values[i] = e.vectors.col(i).dot(m * e.vectors.col(i));

  const double residual = (m * e.vectors - e.vectors * e.values.asDiagonal()).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10 * scale)) return detail::jacobi_eigen(m);
  detail::sort_descending(e);
  return e;
}

/// Oriented local plane fitted to a neighborhood by PCA.
struct PlaneEstimate {
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 eigvals = Vec3::Zero();  ///< descending, clamped at zero
  Mat3 eigvecs = Mat3::Identity();
  int level = 1;
  std::uint64_t support = 0;
};

/// Largest negative eigenvalue tolerated (and clamped to zero), meters^2.
inline constexpr double kEigenClamp = 1e-9;

/// Normal orientation rule: e3 if it faces the sensor, -e3 otherwise. An
/// exactly perpendicular e3 is kept as is.
inline Vec3 orient_towards(const Vec3& e3, const Vec3& center, const Vec3& sensor_pose) {
  return e3.dot(sensor_pose - center) >= 0.0 ? e3 : Vec3(-e3);
}

/// PCA plane of a neighborhood, or nullopt when it has fewer than n_min points.
inline std::optional<PlaneEstimate> fit_plane(const NeighborhoodStats& h, const Vec3& sensor_pose,
                                              std::uint64_t n_min) {
  if (h.count() < n_min || h.count() == 0) return std::nullopt;
  const Mat3 cov = h.cov();
  if (!cov.allFinite()) throw NumericError("fit_plane: degenerate covariance");
  const SymmetricEigen eig = eigen3_symmetric(cov);
  PlaneEstimate plane;
  plane.center = h.mean();
  plane.level = h.level;
  plane.support = h.count();
  plane.eigvecs = eig.vectors;
  for (int i = 0; i < 3; ++i) {
    const double l = eig.values[i];
    if (l < -kEigenClamp) throw NumericError("fit_plane: covariance is not positive semi-definite");
    plane.eigvals[i] = std::max(l, 0.0);
  }
  plane.normal = orient_towards(eig.vectors.col(2), plane.center, sensor_pose);
  return plane;
}

}  // namespace voxsurf
