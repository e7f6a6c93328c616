#pragma once

#include "voxsurf/core.hpp"
#include "voxsurf/mc_tables.hpp"
#include "voxsurf/parallel.hpp"
#include "voxsurf/tsdf.hpp"

#include <array>
#include <optional>
#include <unordered_map>
#include <vector>

namespace voxsurf {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::int32_t, 3>> triangles;
  std::vector<Vec3> normals;  ///< optional, empty or one per vertex

  bool empty() const { return triangles.empty(); }
};

namespace mc {

inline constexpr std::array<Index3, 8> kCornerOffsets = {
    Index3{0, 0, 0}, Index3{1, 0, 0}, Index3{1, 1, 0}, Index3{0, 1, 0},
    Index3{0, 0, 1}, Index3{1, 0, 1}, Index3{1, 1, 1}, Index3{0, 1, 1}};

inline constexpr std::array<std::array<int, 2>, 12> kEdgeCorners = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}}};

/// A cube edge identified by its lower grid vertex and axis; shared by up to
/// four cells, which is what welds their vertices together.
struct EdgeKey {
  Index3 base;
  int axis = 0;
  auto operator<=>(const EdgeKey&) const = default;
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& e) const noexcept {
    return Index3Hash{}(e.base) * 3u + static_cast<std::size_t>(e.axis);
  }
};

inline EdgeKey edge_key(const Index3& cell, int edge) {
  Index3 a = cell + kCornerOffsets[kEdgeCorners[edge][0]];
  Index3 b = cell + kCornerOffsets[kEdgeCorners[edge][1]];
  if (b < a) std::swap(a, b);
  const Index3 d = b - a;
  return {a, d.x != 0 ? 0 : (d.y != 0 ? 1 : 2)};
}

/// Case index: bit i set when corner i is negative. Zero counts as positive.
inline int case_index(const std::array<double, 8>& d) {
  int index = 0;
  for (int i = 0; i < 8; ++i)
    if (d[i] < 0.0) index |= 1 << i;
  return index;
}

/// Interpolation parameter of the zero crossing between values a and b.
inline double crossing(double a, double b) {
  const double t = a / (a - b);
  return std::clamp(t, 0.0, 1.0);
}

}  // namespace mc

/// Marching cubes over the zero level set. Cells with an undefined corner are
/// skipped. Triangles wind counter-clockwise when seen from the positive side.
inline TriangleMesh marching_cubes(const TsdfField& field) {
  TriangleMesh mesh;
  const std::vector<Index3> cells = field.sorted_vertices();

  struct CellTriangles {
    std::vector<mc::EdgeKey> edges;  // 3 per triangle
    std::vector<Vec3> points;
  };
  std::vector<CellTriangles> out(cells.size());

  parallel_for(cells.size(), [&](std::size_t ci) {
    const Index3& cell = cells[ci];
    std::array<double, 8> d{};
    for (int c = 0; c < 8; ++c) {
      auto value = field.at(cell + mc::kCornerOffsets[c]);
      if (!value) return;
      d[c] = *value;
    }
    const int cube = mc::case_index(d);
    if (mc::kEdgeTable[cube] == 0) return;
    const auto& tris = mc::kTriTable[cube];
    for (int i = 0; i < 16 && tris[i] >= 0; ++i) {
      const int e = tris[i];
      const int a = mc::kEdgeCorners[e][0], b = mc::kEdgeCorners[e][1];
      const double t = mc::crossing(d[a], d[b]);
      const Vec3 pa = field.position(cell + mc::kCornerOffsets[a]);
      const Vec3 pb = field.position(cell + mc::kCornerOffsets[b]);
      out[ci].edges.push_back(mc::edge_key(cell, e));
      out[ci].points.push_back(pa + t * (pb - pa));
    }
  });

  std::unordered_map<mc::EdgeKey, std::int32_t, mc::EdgeKeyHash> welded;
  for (const auto& cell : out) {
    for (std::size_t i = 0; i < cell.edges.size(); i += 3) {
      std::array<std::int32_t, 3> tri{};
      for (int j = 0; j < 3; ++j) {
        const auto [it, inserted] =
            welded.try_emplace(cell.edges[i + j], static_cast<std::int32_t>(mesh.vertices.size()));
        // both cells interpolate the same two corner values, so the first
        // position recorded for an edge is the position
        if (inserted) mesh.vertices.push_back(cell.points[i + j]);
        tri[j] = it->second;
      }
      mesh.triangles.push_back(tri);
    }
  }
  return mesh;
}

}  // namespace voxsurf
