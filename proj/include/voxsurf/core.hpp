#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include <algorithm>
#include <compare>
#include <cstdlib>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace voxsurf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Signed integer 3-index of a voxel or a grid vertex.
struct Index3 {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t z = 0;

  constexpr auto operator<=>(const Index3&) const = default;

  constexpr Index3 operator+(const Index3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Index3 operator-(const Index3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr std::int32_t& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr std::int32_t operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
};

struct Index3Hash {
  std::size_t operator()(const Index3& i) const noexcept {
    // 3 large primes; good enough spread for grid keys
    std::uint64_t h = static_cast<std::uint64_t>(static_cast<std::uint32_t>(i.x)) * 73856093ULL;
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(i.y)) * 19349663ULL;
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(i.z)) * 83492791ULL;
    h ^= h >> 29;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 32;
    return static_cast<std::size_t>(h);
  }
};

inline std::int32_t chebyshev(const Index3& a, const Index3& b) {
  const Index3 d = a - b;
  return std::max({std::abs(d.x), std::abs(d.y), std::abs(d.z)});
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument values (non-finite coordinates, empty sets, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration / hyper-parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown, e.g. a covariance that is not positive semi-definite.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. `offset()` is the byte position where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

inline bool is_finite(const Vec3& p) { return p.allFinite(); }

}  // namespace voxsurf
