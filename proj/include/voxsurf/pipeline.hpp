#pragma once

#include "voxsurf/grid.hpp"
#include "voxsurf/imls.hpp"
#include "voxsurf/mesher.hpp"
#include "voxsurf/tsdf.hpp"

#include <chrono>
#include <map>
#include <string>
#include <string_view>

namespace voxsurf {

enum class Method { Adaptive, Imls };

inline Method parse_method(std::string_view s) {
  if (s == "adaptive") return Method::Adaptive;
  if (s == "imls") return Method::Imls;
  throw ConfigError("unknown method '" + std::string(s) + "' (expected adaptive or imls)");
}

inline std::string_view to_string(Method m) { return m == Method::Adaptive ? "adaptive" : "imls"; }

struct Reconstruction {
  TriangleMesh mesh;
  std::size_t occupied_voxels = 0;
  std::size_t defined_vertices = 0;
  std::map<std::string, double> timings_ms;
};

namespace detail {
class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}
  void lap(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    sink_[stage] = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
  }

 private:
  std::map<std::string, double>& sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};
}  // namespace detail

/// grid -> field (adaptive TSDF or IMLS) -> marching cubes.
inline Reconstruction reconstruct(const std::vector<Vec3>& points, const Vec3& sensor_pose,
                                  const ReconstructionConfig& cfg, Method method = Method::Adaptive,
                                  const ImlsConfig* imls = nullptr) {
  cfg.validate();
  Reconstruction out;
  detail::StageTimer timer(out.timings_ms);

  StatGrid grid(cfg.alpha, sensor_pose);
  grid.insert_points(points);
  out.occupied_voxels = grid.occupied();
  timer.lap("grid");

  TsdfField field;
  if (method == Method::Adaptive) {
    field = compute_tsdf(grid, cfg);
  } else {
    const ImlsConfig icfg = imls ? *imls : ImlsConfig::matching(cfg);
    std::vector<Vec3> finite;
    finite.reserve(points.size());
    for (const auto& p : points)
      if (is_finite(p)) finite.push_back(p);
    const KdTree index(finite);
    OrientedCloud oriented = estimate_normals(finite, sensor_pose, icfg.k_neighbors, &index);
    timer.lap("normals");
    field = imls_tsdf(oriented, grid, icfg);
  }
  out.defined_vertices = field.values.size();
  timer.lap("field");

  out.mesh = marching_cubes(field);
  timer.lap("mesh");
  return out;
}

}  // namespace voxsurf
