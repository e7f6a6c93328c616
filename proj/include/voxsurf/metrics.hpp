#pragma once

#include "voxsurf/core.hpp"
#include "voxsurf/kdtree.hpp"
#include "voxsurf/parallel.hpp"

#include <cmath>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace voxsurf {

/// Distance from every src point to its nearest dst point.
inline std::vector<double> nearest_distances(std::span<const Vec3> src, const KdTree& dst) {
  if (src.empty() || dst.empty()) throw InputError("metrics require non-empty point sets");
  std::vector<double> d(src.size());
  parallel_for(src.size(), [&](std::size_t i) { d[i] = std::sqrt(dst.nearest(src[i]).dist2); });
  return d;
}

inline std::vector<double> nearest_distances(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.empty() || dst.empty()) throw InputError("metrics require non-empty point sets");
  return nearest_distances(src, KdTree(dst));
}

namespace detail {
inline double mean_of(const std::vector<double>& d) {
  double sum = 0.0;
  for (double x : d) sum += x;
  return sum / static_cast<double>(d.size());
}
inline double max_of(const std::vector<double>& d) {
  double m = 0.0;
  for (double x : d) m = std::max(m, x);
  return m;
}
}  // namespace detail

inline double directed_average_error(std::span<const Vec3> src, std::span<const Vec3> dst) {
  return detail::mean_of(nearest_distances(src, dst));
}

inline double hausdorff(std::span<const Vec3> src, std::span<const Vec3> dst) {
  return detail::max_of(nearest_distances(src, dst));
}

/// Fraction of src points whose nearest-dst distance is strictly below each threshold.
inline std::vector<std::pair<double, double>> delta_error_curve(const std::vector<double>& errors,
                                                                std::span<const double> thresholds) {
  if (errors.empty()) throw InputError("delta curve requires a non-empty point set");
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw InputError("delta thresholds must be sorted ascending");
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    curve.emplace_back(t, static_cast<double>(below) / static_cast<double>(sorted.size()));
  }
  return curve;
}

inline std::vector<std::pair<double, double>> delta_error_curve(std::span<const Vec3> src,
                                                                std::span<const Vec3> dst,
                                                                std::span<const double> thresholds) {
  return delta_error_curve(nearest_distances(src, dst), thresholds);
}

/// Mean error per bucket of distance-to-sensor. Each entry is (bucket lower
/// edge, mean error); empty buckets are omitted.
inline std::vector<std::pair<double, double>> range_profile(std::span<const Vec3> src,
                                                            const std::vector<double>& errors,
                                                            const Vec3& sensor_pose, double bin_width) {
  if (src.empty()) throw InputError("range profile requires a non-empty point set");
  if (!(bin_width > 0.0)) throw InputError("bin width must be positive");
  std::map<long long, std::pair<double, std::size_t>> bins;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto bin = static_cast<long long>(std::floor((src[i] - sensor_pose).norm() / bin_width));
    auto& [sum, n] = bins[bin];
    sum += errors[i];
    ++n;
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [bin, acc] : bins)
    out.emplace_back(static_cast<double>(bin) * bin_width, acc.first / static_cast<double>(acc.second));
  return out;
}

inline std::vector<std::pair<double, double>> range_profile(std::span<const Vec3> src,
                                                            std::span<const Vec3> dst,
                                                            const Vec3& sensor_pose, double bin_width) {
  return range_profile(src, nearest_distances(src, dst), sensor_pose, bin_width);
}

/// Default delta thresholds: 0.00, 0.01, ..., 1.00 m.
inline std::vector<double> default_delta_thresholds(double step = 0.01, double max = 1.0) {
  std::vector<double> t;
  const auto n = static_cast<int>(std::llround(max / step));
  for (int i = 0; i <= n; ++i) t.push_back(i * step);
  return t;
}

struct MetricsReport {
  double ae_p_to_gt = 0.0, ae_gt_to_p = 0.0, ae_sym = 0.0;
  double hd_p_to_gt = 0.0, hd_gt_to_p = 0.0, hd_sym = 0.0;
  std::vector<std::pair<double, double>> delta_curve;
  std::vector<std::pair<double, double>> range_profile;
};

/// Full evaluation of predicted points (mesh vertices) against ground truth.
inline MetricsReport evaluate(std::span<const Vec3> predicted, std::span<const Vec3> ground_truth,
                              const Vec3& sensor_pose, std::span<const double> thresholds,
                              double bin_width = 1.0) {
  if (predicted.empty() || ground_truth.empty()) throw InputError("metrics require non-empty point sets");
  const std::vector<double> p_to_gt = nearest_distances(predicted, ground_truth);
  const std::vector<double> gt_to_p = nearest_distances(ground_truth, predicted);
  MetricsReport r;
  r.ae_p_to_gt = detail::mean_of(p_to_gt);
  r.ae_gt_to_p = detail::mean_of(gt_to_p);
  r.ae_sym = 0.5 * (r.ae_p_to_gt + r.ae_gt_to_p);
  r.hd_p_to_gt = detail::max_of(p_to_gt);
  r.hd_gt_to_p = detail::max_of(gt_to_p);
  r.hd_sym = 0.5 * (r.hd_p_to_gt + r.hd_gt_to_p);
  r.delta_curve = delta_error_curve(p_to_gt, thresholds);
  r.range_profile = range_profile(predicted, p_to_gt, sensor_pose, bin_width);
  return r;
}

}  // namespace voxsurf
