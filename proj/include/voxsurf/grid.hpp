#pragma once

#include "voxsurf/core.hpp"

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace voxsurf {

/// Running count / mean / covariance of the points that fell into one voxel.
///
/// The scatter matrix (sum of outer products of centered points) is stored
/// rather than the covariance so that merging two sets is exact. Covariance
/// uses the population convention: cov = scatter / count.
class VoxelStats {
 public:
  VoxelStats() = default;

  static VoxelStats from_point(const Vec3& p) {
    VoxelStats s;
    s.count_ = 1;
    s.mean_ = p;
    return s;
  }

  /// Statistics from precomputed moments (population covariance).
  static VoxelStats from_moments(std::uint64_t count, const Vec3& mean, const Mat3& cov) {
    VoxelStats s;
    if (count == 0) return s;
    s.count_ = count;
    s.mean_ = mean;
    s.scatter_ = cov * static_cast<double>(count);
    return s;
  }

  /// Welford update.
  void add(const Vec3& p) {
    ++count_;
    const double n = static_cast<double>(count_);
    const Vec3 delta = p - mean_;
    mean_ += delta / n;
    scatter_.noalias() += ((n - 1.0) / n) * delta * delta.transpose();
  }

  /// Chan et al. pairwise combination; exact for the union of both sets.
  void merge(const VoxelStats& o) {
    if (o.count_ == 0) return;
    if (count_ == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(o.count_);
    const double n = na + nb;
    const Vec3 delta = o.mean_ - mean_;
    mean_ += delta * (nb / n);
    scatter_ += o.scatter_;
    scatter_.noalias() += (na * nb / n) * delta * delta.transpose();
    count_ += o.count_;
  }

  std::uint64_t count() const { return count_; }
  bool empty() const { return count_ == 0; }
  const Vec3& mean() const { return mean_; }
  const Mat3& scatter() const { return scatter_; }

  Mat3 cov() const {
    if (count_ == 0) return Mat3::Zero();
    Mat3 c = scatter_ / static_cast<double>(count_);
    return 0.5 * (c + c.transpose());
  }

 private:
  std::uint64_t count_ = 0;
  Vec3 mean_ = Vec3::Zero();
  Mat3 scatter_ = Mat3::Zero();
};

inline VoxelStats merge_stats(VoxelStats a, const VoxelStats& b) {
  a.merge(b);
  return a;
}

/// Merged statistics of the (2k)^3 voxels surrounding a grid vertex.
struct NeighborhoodStats {
  int level = 1;
  VoxelStats stats;

  std::uint64_t count() const { return stats.count(); }
  const Vec3& mean() const { return stats.mean(); }
  Mat3 cov() const { return stats.cov(); }
};

using VoxelMap = std::unordered_map<Index3, VoxelStats, Index3Hash>;

/// Sparse voxel grid of Gaussian statistics.
///
/// Voxel (i,j,k) covers origin + cell_size * [i,i+1) x [j,j+1) x [k,k+1).
/// Vertex (i,j,k) is the corner at origin + cell_size * (i,j,k); its level-k
/// neighborhood is the voxels with indices in [v-k, v+k-1] on every axis.
/// The origin is the sensor pose, so the sensor sits on vertex (0,0,0).
class StatGrid {
 public:
  StatGrid(double cell_size, const Vec3& sensor_pose)
      : cell_size_(cell_size), origin_(sensor_pose), sensor_pose_(sensor_pose) {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size))
      throw ConfigError("cell size must be positive and finite");
    if (!is_finite(sensor_pose)) throw InputError("sensor pose must be finite");
  }

  double cell_size() const { return cell_size_; }
  const Vec3& origin() const { return origin_; }
  const Vec3& sensor_pose() const { return sensor_pose_; }
  const VoxelMap& cells() const { return cells_; }
  std::size_t occupied() const { return cells_.size(); }
  std::uint64_t total_points() const { return total_; }

  Index3 voxel_of(const Vec3& p) const {
    const Vec3 rel = (p - origin_) / cell_size_;
    return {static_cast<std::int32_t>(std::floor(rel.x())),
            static_cast<std::int32_t>(std::floor(rel.y())),
            static_cast<std::int32_t>(std::floor(rel.z()))};
  }

  Vec3 vertex_position(const Index3& v) const {
    return origin_ + cell_size_ * Vec3(v.x, v.y, v.z);
  }

  void insert_point(const Vec3& p) {
    if (!is_finite(p)) throw InputError("cannot insert a non-finite point");
    cells_[voxel_of(p)].add(p);
    ++total_;
  }

  /// Inserts every finite point; returns the number of rejected ones.
  std::size_t insert_points(const std::vector<Vec3>& points) {
    std::size_t rejected = 0;
    for (const auto& p : points) {
      if (!is_finite(p)) {
        ++rejected;
        continue;
      }
      cells_[voxel_of(p)].add(p);
      ++total_;
    }
    return rejected;
  }

  const VoxelStats* find(const Index3& voxel) const {
    const auto it = cells_.find(voxel);
    return it == cells_.end() ? nullptr : &it->second;
  }

  /// Occupied voxel indices in lexicographic order.
  std::vector<Index3> sorted_voxels() const {
    std::vector<Index3> keys;
    keys.reserve(cells_.size());
    for (const auto& [k, _] : cells_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    return keys;
  }

 private:
  double cell_size_;
  Vec3 origin_;
  Vec3 sensor_pose_;
  VoxelMap cells_;
  std::uint64_t total_ = 0;
};

/// Direct merge over the (2k)^3 voxels around `vertex`.
inline NeighborhoodStats neighborhood_stats(const StatGrid& grid, const Index3& vertex, int k) {
  if (k < 1) throw ConfigError("neighborhood level must be >= 1");
  NeighborhoodStats out;
  out.level = k;
  for (std::int32_t dx = -k; dx < k; ++dx)
    for (std::int32_t dy = -k; dy < k; ++dy)
      for (std::int32_t dz = -k; dz < k; ++dz)
        if (const VoxelStats* s = grid.find(vertex + Index3{dx, dy, dz})) out.stats.merge(*s);
  return out;
}

/// Level-k neighborhood statistics of every vertex with a non-empty
/// neighborhood, computed with three separable window passes (one per
/// axis) instead of (2k)^3 lookups per vertex.
inline VoxelMap aggregate_level(const StatGrid& grid, int k) {
  if (k < 1) throw ConfigError("neighborhood level must be >= 1");
  VoxelMap current = grid.cells();
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<Index3> keys;
    keys.reserve(current.size());
    for (const auto& [key, _] : current) keys.push_back(key);
    std::sort(keys.begin(), keys.end());

    VoxelMap next;
    next.reserve(current.size() * static_cast<std::size_t>(2 * k) / 2 + 16);
    for (const Index3& key : keys) {
      const VoxelStats& s = current.find(key)->second;
      // voxel i lies in the window [v-k, v+k-1] of vertices v in [i-k+1, i+k]
      Index3 target = key;
      for (std::int32_t v = key[axis] - k + 1; v <= key[axis] + k; ++v) {
        target[axis] = v;
        next[target].merge(s);
      }
    }
    current = std::move(next);
  }
  return current;
}

/// Vertices whose level-k neighborhood contains at least one occupied voxel,
/// sorted lexicographically.
inline std::vector<Index3> candidate_vertices(const StatGrid& grid, int k) {
  std::unordered_map<Index3, char, Index3Hash> seen;
  for (const auto& [voxel, _] : grid.cells())
    for (std::int32_t dx = -k + 1; dx <= k; ++dx)
      for (std::int32_t dy = -k + 1; dy <= k; ++dy)
        for (std::int32_t dz = -k + 1; dz <= k; ++dz) seen.emplace(voxel + Index3{dx, dy, dz}, 0);
  std::vector<Index3> out;
  out.reserve(seen.size());
  for (const auto& [v, _] : seen) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace voxsurf
