#pragma once

#include "voxsurf/core.hpp"
#include "voxsurf/geometry.hpp"
#include "voxsurf/grid.hpp"
#include "voxsurf/parallel.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace voxsurf {

/// Neighborhood selection strategy.
///  - AdaptiveGC:  smallest level passing the support and confidence tests
///  - Adaptive:    smallest level passing the support test
///  - ConstantGC:  fixed level, must pass both tests
///  - Constant:    fixed level, must pass the support test
enum class Mode { AdaptiveGC, Adaptive, ConstantGC, Constant };

enum class Confidence { PeakNormalized, RawDensity };

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::AdaptiveGC: return "an-gc";
    case Mode::Adaptive: return "an";
    case Mode::ConstantGC: return "cn-gc";
    case Mode::Constant: return "cn";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "an-gc") return Mode::AdaptiveGC;
  if (s == "an") return Mode::Adaptive;
  if (s == "cn-gc") return Mode::ConstantGC;
  if (s == "cn") return Mode::Constant;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected an-gc, an, cn-gc or cn)");
}

inline std::string_view to_string(Confidence c) {
  return c == Confidence::PeakNormalized ? "peak" : "raw";
}

inline Confidence parse_confidence(std::string_view s) {
  if (s == "peak") return Confidence::PeakNormalized;
  if (s == "raw") return Confidence::RawDensity;
  throw ConfigError("unknown confidence convention '" + std::string(s) + "' (expected peak or raw)");
}

struct ReconstructionConfig {
  double alpha = 0.2;
  double tau = 0.2;
  std::uint64_t n_min = 10;
  int k_max = 5;
  Mode mode = Mode::AdaptiveGC;
  int fixed_k = 1;
  /// Non-positive means alpha * k_max.
  double truncation = 0.0;
  Confidence confidence = Confidence::PeakNormalized;

  double effective_truncation() const { return truncation > 0.0 ? truncation : alpha * k_max; }

  bool adaptive() const { return mode == Mode::AdaptiveGC || mode == Mode::Adaptive; }
  bool gated() const { return mode == Mode::AdaptiveGC || mode == Mode::ConstantGC; }

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 0");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be >= 0");
    if (k_max < 1) throw ConfigError("k_max must be >= 1");
    if (!adaptive() && (fixed_k < 1 || fixed_k > k_max))
      throw ConfigError("fixed_k must lie in [1, k_max]");
    if (!(effective_truncation() > 0.0) || !std::isfinite(effective_truncation()))
      throw ConfigError("truncation must be > 0");
  }
};

/// Floor applied to the in-plane eigenvalues before evaluating the Gaussian.
inline constexpr double kLambdaFloor = 1e-12;

/// Likelihood that the projection of `point` onto the plane belongs to the
/// 2D Gaussian N(center, diag(l1, l2)) expressed in the (e1, e2) frame.
inline double gaussian_confidence(const PlaneEstimate& plane, const Vec3& point,
                                  Confidence convention = Confidence::PeakNormalized) {
  const Vec3 rel = point - plane.center;
  const Vec3 projected = rel - plane.normal * plane.normal.dot(rel);
  const double l1 = std::max(plane.eigvals[0], kLambdaFloor);
  const double l2 = std::max(plane.eigvals[1], kLambdaFloor);
  const double u1 = plane.eigvecs.col(0).dot(projected);
  const double u2 = plane.eigvecs.col(1).dot(projected);
  const double m2 = u1 * u1 / l1 + u2 * u2 / l2;
  const double peak = std::exp(-0.5 * m2);
  if (convention == Confidence::PeakNormalized) return peak;
  return peak / (2.0 * std::numbers::pi * std::sqrt(l1 * l2));
}

/// Per-vertex signed distances. Vertices without a value are undefined.
struct TsdfField {
  Vec3 origin = Vec3::Zero();
  double alpha = 1.0;
  double truncation = 1.0;
  std::unordered_map<Index3, double, Index3Hash> values;

  std::optional<double> at(const Index3& v) const {
    const auto it = values.find(v);
    if (it == values.end()) return std::nullopt;
    return it->second;
  }

  Vec3 position(const Index3& v) const { return origin + alpha * Vec3(v.x, v.y, v.z); }

  std::vector<Index3> sorted_vertices() const {
    std::vector<Index3> keys;
    keys.reserve(values.size());
    for (const auto& [k, _] : values) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    return keys;
  }
};

namespace detail {

/// Plane for one level if it passes the support test and, when gated,
/// the confidence test.
inline std::optional<PlaneEstimate> qualify(const NeighborhoodStats& h, const Vec3& vertex_pos,
                                            const Vec3& sensor_pose, const ReconstructionConfig& cfg) {
  auto plane = fit_plane(h, sensor_pose, cfg.n_min);
  if (!plane) return std::nullopt;
  if (cfg.gated() && gaussian_confidence(*plane, vertex_pos, cfg.confidence) < cfg.tau) return std::nullopt;
  return plane;
}

inline double signed_distance(const PlaneEstimate& plane, const Vec3& vertex_pos, double truncation) {
  return std::clamp(plane.normal.dot(vertex_pos - plane.center), -truncation, truncation);
}

}  // namespace detail

/// Level choice for one vertex, or nullopt when no level qualifies.
inline std::optional<PlaneEstimate> select_level(const StatGrid& grid, const Index3& vertex,
                                                 const ReconstructionConfig& cfg) {
  cfg.validate();
  const Vec3 pos = grid.vertex_position(vertex);
  const int first = cfg.adaptive() ? 1 : cfg.fixed_k;
  const int last = cfg.adaptive() ? cfg.k_max : cfg.fixed_k;
  for (int k = first; k <= last; ++k) {
    if (auto plane = detail::qualify(neighborhood_stats(grid, vertex, k), pos, grid.sensor_pose(), cfg))
      return plane;
  }
  return std::nullopt;
}

/// TSDF over every vertex with support within k_max voxels. Levels are
/// processed in increasing order; each level's neighborhoods come from a
/// separable aggregation and vertices are evaluated independently.
inline TsdfField compute_tsdf(const StatGrid& grid, const ReconstructionConfig& cfg) {
  cfg.validate();
  if (std::abs(grid.cell_size() - cfg.alpha) > 1e-12 * cfg.alpha)
    throw ConfigError("grid cell size does not match alpha");

  TsdfField field;
  field.origin = grid.origin();
  field.alpha = grid.cell_size();
  field.truncation = cfg.effective_truncation();

  const int first = cfg.adaptive() ? 1 : cfg.fixed_k;
  const int last = cfg.adaptive() ? cfg.k_max : cfg.fixed_k;
  for (int k = first; k <= last; ++k) {
    const VoxelMap level = aggregate_level(grid, k);
    std::vector<std::pair<Index3, const VoxelStats*>> pending;
    pending.reserve(level.size());
    for (const auto& [v, s] : level)
      if (!field.values.contains(v)) pending.emplace_back(v, &s);
    std::sort(pending.begin(), pending.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<std::optional<double>> result(pending.size());
    parallel_for(pending.size(), [&](std::size_t i) {
      const Vec3 pos = grid.vertex_position(pending[i].first);
      NeighborhoodStats h{k, *pending[i].second};
      if (auto plane = detail::qualify(h, pos, grid.sensor_pose(), cfg))
        result[i] = detail::signed_distance(*plane, pos, field.truncation);
    });
    for (std::size_t i = 0; i < pending.size(); ++i)
      if (result[i]) field.values.emplace(pending[i].first, *result[i]);
  }
  return field;
}

/// Reference evaluation of the same field through select_level, one vertex
/// at a time over the candidate set.
inline TsdfField compute_tsdf_direct(const StatGrid& grid, const ReconstructionConfig& cfg) {
  cfg.validate();
  TsdfField field;
  field.origin = grid.origin();
  field.alpha = grid.cell_size();
  field.truncation = cfg.effective_truncation();
  const int reach = cfg.adaptive() ? cfg.k_max : cfg.fixed_k;
  for (const Index3& v : candidate_vertices(grid, reach)) {
    if (auto plane = select_level(grid, v, cfg))
      field.values.emplace(v, detail::signed_distance(*plane, grid.vertex_position(v), field.truncation));
  }
  return field;
}

}  // namespace voxsurf
