#pragma once

#include "voxsurf/core.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <vector>

namespace voxsurf {

/// Static 3D k-d tree with exact (backtracking) nearest-neighbor, k-nearest
/// and radius queries. The point array is copied; indices refer to the
/// original order.
class KdTree {
 public:
  struct Hit {
    std::size_t index = 0;
    double dist2 = std::numeric_limits<double>::infinity();
  };

  KdTree() = default;

  explicit KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    if (!points_.empty()) build(0, points_.size());
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  Hit nearest(const Vec3& q) const {
    Hit best;
    if (!nodes_.empty()) nearest_rec(0, q, best);
    return best;
  }

  /// k nearest points sorted by increasing distance (ties by index).
  std::vector<Hit> knn(const Vec3& q, std::size_t k) const {
    std::vector<Hit> heap;  // max-heap on dist2
    if (k == 0 || nodes_.empty()) return heap;
    heap.reserve(k + 1);
    knn_rec(0, q, k, heap);
    std::sort_heap(heap.begin(), heap.end(), hit_less);
    return heap;
  }

  /// All points with distance <= radius, in increasing index order.
  std::vector<Hit> radius(const Vec3& q, double r) const {
    std::vector<Hit> out;
    if (!nodes_.empty()) radius_rec(0, q, r * r, out);
    std::sort(out.begin(), out.end(), [](const Hit& a, const Hit& b) { return a.index < b.index; });
    return out;
  }

 private:
  static constexpr std::size_t kLeafSize = 12;

  struct Node {
    std::uint32_t begin = 0, end = 0;  // range into order_ (leaf)
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
    bool leaf() const { return left < 0; }
  };

  static bool hit_less(const Hit& a, const Hit& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
  }

  double dist2(std::size_t i, const Vec3& q) const { return (points_[i] - q).squaredNorm(); }

  std::int32_t build(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= kLeafSize) {
      nodes_[id].begin = static_cast<std::uint32_t>(begin);
      nodes_[id].end = static_cast<std::uint32_t>(end);
      return id;
    }
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (std::size_t i = begin; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]]);
      hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
    const double split = points_[order_[mid]][axis];
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    Node& n = nodes_[id];
    n.axis = axis;
    n.split = split;
    n.left = left;
    n.right = right;
    return id;
  }

  // Left subtree holds coordinates <= split, right subtree >= split.
  void nearest_rec(std::int32_t id, const Vec3& q, Hit& best) const {
    const Node& n = nodes_[id];
    if (n.leaf()) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const Hit h{order_[i], dist2(order_[i], q)};
        if (hit_less(h, best)) best = h;
      }
      return;
    }
    const double diff = q[n.axis] - n.split;
    const std::int32_t near = diff <= 0.0 ? n.left : n.right;
    const std::int32_t far = diff <= 0.0 ? n.right : n.left;
    nearest_rec(near, q, best);
    if (diff * diff <= best.dist2) nearest_rec(far, q, best);
  }

  void knn_rec(std::int32_t id, const Vec3& q, std::size_t k, std::vector<Hit>& heap) const {
    const Node& n = nodes_[id];
    if (n.leaf()) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const Hit h{order_[i], dist2(order_[i], q)};
        if (heap.size() < k) {
          heap.push_back(h);
          std::push_heap(heap.begin(), heap.end(), hit_less);
        } else if (hit_less(h, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), hit_less);
          heap.back() = h;
          std::push_heap(heap.begin(), heap.end(), hit_less);
        }
      }
      return;
    }
    const double diff = q[n.axis] - n.split;
    const std::int32_t near = diff <= 0.0 ? n.left : n.right;
    const std::int32_t far = diff <= 0.0 ? n.right : n.left;
    knn_rec(near, q, k, heap);
    if (heap.size() < k || diff * diff <= heap.front().dist2) knn_rec(far, q, k, heap);
  }

  void radius_rec(std::int32_t id, const Vec3& q, double r2, std::vector<Hit>& out) const {
    const Node& n = nodes_[id];
    if (n.leaf()) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const double d2 = dist2(order_[i], q);
        if (d2 <= r2) out.push_back({order_[i], d2});
      }
      return;
    }
    const double diff = q[n.axis] - n.split;
    if (diff <= 0.0 || diff * diff <= r2) radius_rec(n.left, q, r2, out);
    if (diff >= 0.0 || diff * diff <= r2) radius_rec(n.right, q, r2, out);
  }

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace voxsurf
