#pragma once

#include "voxsurf/core.hpp"
#include "voxsurf/io.hpp"
#include "voxsurf/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <variant>
#include <vector>

namespace voxsurf {

struct GroundPlane {
  double z = 0.0;
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

/// Closed vertical cylinder standing on `base` (center of the bottom cap).
struct Cylinder {
  Vec3 base = Vec3::Zero();
  double radius = 0.5;
  double height = 1.0;
};

using Primitive = std::variant<GroundPlane, Box, Sphere, Cylinder>;

struct Scene {
  std::vector<Primitive> primitives;

  void validate() const {
    for (const auto& prim : primitives) {
      std::visit(
          [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Box>) {
              if (!((p.max - p.min).array() > 0.0).all()) throw ConfigError("box must have positive extent");
            } else if constexpr (std::is_same_v<T, Sphere>) {
              if (!(p.radius > 0.0)) throw ConfigError("sphere radius must be positive");
            } else if constexpr (std::is_same_v<T, Cylinder>) {
              if (!(p.radius > 0.0) || !(p.height > 0.0))
                throw ConfigError("cylinder radius and height must be positive");
            }
          },
          prim);
    }
  }
};

/// Spinning multi-layer Lidar. Layers are evenly spaced over the vertical
/// field of view (a single layer sits at its middle); azimuth steps cover
/// the full turn starting at +x.
struct ScannerSpec {
  Vec3 origin = Vec3(0.0, 0.0, 1.73);
  int layers = 64;
  double fov_min_deg = -24.8;
  double fov_max_deg = 2.0;
  int horizontal_steps = 900;
  double range_max = 40.0;
  double noise_sigma = 0.0;

  void validate() const {
    if (layers < 1) throw ConfigError("scanner needs at least one layer");
    if (horizontal_steps < 1) throw ConfigError("scanner needs at least one azimuth step");
    if (!(range_max > 0.0)) throw ConfigError("scanner range must be positive");
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
    if (fov_max_deg < fov_min_deg) throw ConfigError("vertical fov max is below min");
  }

  double elevation_deg(int layer) const {
    if (layers == 1) return 0.5 * (fov_min_deg + fov_max_deg);
    return fov_min_deg + (fov_max_deg - fov_min_deg) * layer / (layers - 1);
  }

  Vec3 direction(int layer, int step) const {
    const double el = elevation_deg(layer) * std::numbers::pi / 180.0;
    const double az = 2.0 * std::numbers::pi * step / horizontal_steps;
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
  }
};

/// Sensor matching the 64-layer sparse default with 316 layers and a 0.1
/// degree azimuth step, used for ground truth.
inline ScannerSpec dense_scanner(const ScannerSpec& sparse) {
  ScannerSpec dense = sparse;
  dense.layers = 316;
  dense.horizontal_steps = 3600;
  dense.noise_sigma = 0.0;
  return dense;
}

namespace detail {

inline constexpr double kRayEpsilon = 1e-9;

inline std::optional<double> intersect(const GroundPlane& g, const Vec3& o, const Vec3& d) {
  if (d.z() == 0.0) return std::nullopt;
  const double t = (g.z - o.z()) / d.z();
  if (t > kRayEpsilon) return t;
  return std::nullopt;
}

inline std::optional<double> intersect(const Box& b, const Vec3& o, const Vec3& d) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (o[i] < b.min[i] || o[i] > b.max[i]) return std::nullopt;
      continue;
    }
    double t0 = (b.min[i] - o[i]) / d[i];
    double t1 = (b.max[i] - o[i]) / d[i];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far) return std::nullopt;
  if (t_near > kRayEpsilon) return t_near;
  if (t_far > kRayEpsilon) return t_far;
  return std::nullopt;
}

inline std::optional<double> smallest_root(double a, double half_b, double c) {
  const double disc = half_b * half_b - a * c;
  if (disc < 0.0 || a == 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  // numerically stable pair of roots
  const double q = -(half_b + std::copysign(s, half_b));
  double r0 = q / a, r1 = q != 0.0 ? c / q : r0;
  if (r0 > r1) std::swap(r0, r1);
  if (r0 > kRayEpsilon) return r0;
  if (r1 > kRayEpsilon) return r1;
  return std::nullopt;
}

inline std::optional<double> intersect(const Sphere& s, const Vec3& o, const Vec3& d) {
  const Vec3 oc = o - s.center;
  return smallest_root(d.squaredNorm(), oc.dot(d), oc.squaredNorm() - s.radius * s.radius);
}

inline std::optional<double> intersect(const Cylinder& c, const Vec3& o, const Vec3& d) {
  std::optional<double> best;
  auto consider = [&](double t) {
    if (t > kRayEpsilon && (!best || t < *best)) best = t;
  };
  const double z0 = c.base.z(), z1 = c.base.z() + c.height;
  const double ox = o.x() - c.base.x(), oy = o.y() - c.base.y();
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 0.0) {
    const double half_b = ox * d.x() + oy * d.y();
    const double cc = ox * ox + oy * oy - c.radius * c.radius;
    const double disc = half_b * half_b - a * cc;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      for (double t : {(-half_b - s) / a, (-half_b + s) / a}) {
        const double z = o.z() + t * d.z();
        if (z >= z0 && z <= z1) consider(t);
      }
    }
  }
  if (d.z() != 0.0) {
    for (double zc : {z0, z1}) {
      const double t = (zc - o.z()) / d.z();
      const double x = ox + t * d.x(), y = oy + t * d.y();
      if (x * x + y * y <= c.radius * c.radius) consider(t);
    }
  }
  return best;
}

inline double surface_distance(const GroundPlane& g, const Vec3& p) { return std::abs(p.z() - g.z); }

inline double surface_distance(const Box& b, const Vec3& p) {
  const Vec3 outside = (b.min - p).cwiseMax(p - b.max).cwiseMax(0.0);
  if (outside.squaredNorm() > 0.0) return outside.norm();
  const Vec3 inside = (p - b.min).cwiseMin(b.max - p);
  return inside.minCoeff();
}

inline double surface_distance(const Sphere& s, const Vec3& p) {
  return std::abs((p - s.center).norm() - s.radius);
}

inline double surface_distance(const Cylinder& c, const Vec3& p) {
  const double r = std::hypot(p.x() - c.base.x(), p.y() - c.base.y());
  const double z0 = c.base.z(), z1 = c.base.z() + c.height;
  const double dr = r - c.radius;
  const double dz = std::max(z0 - p.z(), p.z() - z1);
  if (dr <= 0.0 && dz <= 0.0) return std::min(-dr, -dz);
  return std::hypot(std::max(dr, 0.0), std::max(dz, 0.0));
}

}  // namespace detail

/// Nearest hit distance along a unit ray, if any primitive is hit.
inline std::optional<double> cast_ray(const Scene& scene, const Vec3& origin, const Vec3& dir) {
  std::optional<double> best;
  for (const auto& prim : scene.primitives) {
    const auto t = std::visit([&](const auto& p) { return detail::intersect(p, origin, dir); }, prim);
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

/// Distance from p to the closest primitive surface.
inline double scene_distance(const Scene& scene, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& prim : scene.primitives)
    best = std::min(best, std::visit([&](const auto& s) { return detail::surface_distance(s, p); }, prim));
  return best;
}

/// Simulated scan ordered by (layer, azimuth). Range noise is drawn from a
/// per-layer generator so layers can be produced independently.
inline PointCloud scan(const Scene& scene, const ScannerSpec& spec, std::uint64_t seed) {
  scene.validate();
  spec.validate();
  std::vector<std::vector<Vec3>> per_layer(static_cast<std::size_t>(spec.layers));
  parallel_for(per_layer.size(), [&](std::size_t layer) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(layer)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
    auto& out = per_layer[layer];
    for (int step = 0; step < spec.horizontal_steps; ++step) {
      const Vec3 dir = spec.direction(static_cast<int>(layer), step);
      const auto t = cast_ray(scene, spec.origin, dir);
      if (!t || *t > spec.range_max) continue;
      double range = *t;
      if (spec.noise_sigma > 0.0) range += noise(rng);
      out.push_back(spec.origin + range * dir);
    }
  });
  PointCloud cloud;
  cloud.sensor_pose = spec.origin;
  for (auto& layer : per_layer) cloud.points.insert(cloud.points.end(), layer.begin(), layer.end());
  return cloud;
}

/// Noise-free high-resolution scan from the same origin.
inline PointCloud ground_truth_cloud(const Scene& scene, const ScannerSpec& dense) {
  if (dense.noise_sigma != 0.0) throw ConfigError("ground-truth scanner must be noise-free");
  return scan(scene, dense, 0);
}

/// Ground plane with a box, a sphere and a pole around the sensor.
inline Scene default_scene() {
  Scene s;
  s.primitives.push_back(GroundPlane{0.0});
  s.primitives.push_back(Box{Vec3(6.0, -2.0, 0.0), Vec3(10.0, 2.0, 2.5)});
  s.primitives.push_back(Sphere{Vec3(-5.0, 4.0, 1.0), 1.0});
  s.primitives.push_back(Cylinder{Vec3(3.0, -6.0, 0.0), 0.4, 3.0});
  return s;
}

}  // namespace voxsurf
