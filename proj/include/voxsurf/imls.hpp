#pragma once

#include "voxsurf/core.hpp"
#include "voxsurf/geometry.hpp"
#include "voxsurf/grid.hpp"
#include "voxsurf/kdtree.hpp"
#include "voxsurf/parallel.hpp"
#include "voxsurf/tsdf.hpp"

#include <cmath>
#include <vector>

namespace voxsurf {

/// Implicit moving least squares baseline. Defaults tie the neighborhood to
/// the adaptive method's reach: radius = alpha * k_max, k = N_min, h = radius / 3.
struct ImlsConfig {
  double radius = 1.0;
  int k_neighbors = 10;
  double h = 1.0 / 3.0;
  /// Non-positive means radius.
  double truncation = 0.0;
  /// Candidate vertices are those within this many voxels of occupancy.
  int reach = 5;

  static ImlsConfig matching(const ReconstructionConfig& rc) {
    ImlsConfig c;
    c.radius = rc.alpha * rc.k_max;
    c.k_neighbors = static_cast<int>(rc.n_min);
    c.h = c.radius / 3.0;
    c.truncation = rc.effective_truncation();
    c.reach = rc.k_max;
    return c;
  }

  double effective_truncation() const { return truncation > 0.0 ? truncation : radius; }

  void validate() const {
    if (!(radius > 0.0)) throw ConfigError("IMLS radius must be > 0");
    if (!(h > 0.0)) throw ConfigError("IMLS h must be > 0");
    if (k_neighbors < 3) throw ConfigError("IMLS needs k_neighbors >= 3");
    if (reach < 1) throw ConfigError("IMLS reach must be >= 1");
  }
};

struct OrientedCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
};

/// Per-point normals from PCA over the k nearest neighbors (the point
/// itself included), oriented towards the sensor.
inline OrientedCloud estimate_normals(const std::vector<Vec3>& points, const Vec3& sensor_pose, int k,
                                      const KdTree* index = nullptr) {
  OrientedCloud out;
  out.points = points;
  out.normals.resize(points.size(), Vec3::UnitZ());
  KdTree local;
  if (!index) {
    local = KdTree(points);
    index = &local;
  }
  parallel_for(points.size(), [&](std::size_t i) {
    const auto hits = index->knn(points[i], static_cast<std::size_t>(k));
    VoxelStats s;
    for (const auto& h : hits) s.add(index->point(h.index));
    const Vec3 e3 = eigen3_symmetric(s.cov()).vectors.col(2);
    out.normals[i] = orient_towards(e3, points[i], sensor_pose);
  });
  return out;
}

namespace detail {

inline std::optional<double> imls_value(const OrientedCloud& cloud, const KdTree& index, const Vec3& v,
                                        const ImlsConfig& cfg) {
  const auto hits = index.radius(v, cfg.radius);
  if (hits.empty()) return std::nullopt;
  const double inv_h2 = 1.0 / (cfg.h * cfg.h);
  double num = 0.0, den = 0.0;
  for (const auto& hit : hits) {
    const double w = std::exp(-hit.dist2 * inv_h2);
    num += w * cloud.normals[hit.index].dot(v - cloud.points[hit.index]);
    den += w;
  }
  if (!(den > 0.0)) return std::nullopt;
  const double trunc = cfg.effective_truncation();
  return std::clamp(num / den, -trunc, trunc);
}

}  // namespace detail

/// IMLS signed distance at a single location; nullopt without neighbors.
inline std::optional<double> imls_value(const OrientedCloud& cloud, const KdTree& index, const Vec3& v,
                                        const ImlsConfig& cfg) {
  return detail::imls_value(cloud, index, v, cfg);
}

/// IMLS field on the same candidate vertices as the adaptive TSDF.
inline TsdfField imls_tsdf(const OrientedCloud& cloud, const StatGrid& grid, const ImlsConfig& cfg) {
  cfg.validate();
  if (cloud.points.size() != cloud.normals.size()) throw InputError("IMLS needs one normal per point");
  TsdfField field;
  field.origin = grid.origin();
  field.alpha = grid.cell_size();
  field.truncation = cfg.effective_truncation();
  if (cloud.points.empty()) return field;

  const KdTree index(cloud.points);
  const std::vector<Index3> candidates = candidate_vertices(grid, cfg.reach);
  std::vector<std::optional<double>> values(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t i) {
    values[i] = detail::imls_value(cloud, index, grid.vertex_position(candidates[i]), cfg);
  });
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (values[i]) field.values.emplace(candidates[i], *values[i]);
  return field;
}

}  // namespace voxsurf
