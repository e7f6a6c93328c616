#pragma once

#include "voxsurf/core.hpp"
#include "voxsurf/mesher.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace voxsurf {

struct PointCloud {
  std::vector<Vec3> points;
  Vec3 sensor_pose = Vec3::Zero();
  std::size_t dropped = 0;  ///< non-finite rows discarded on load
};

enum class CloudFormat { Ply, Xyz, KittiBin };

inline CloudFormat parse_cloud_format(std::string_view s) {
  if (s == "ply") return CloudFormat::Ply;
  if (s == "xyz") return CloudFormat::Xyz;
  if (s == "kitti-bin" || s == "bin") return CloudFormat::KittiBin;
  throw ConfigError("unknown cloud format '" + std::string(s) + "' (expected ply, xyz or kitti-bin)");
}

/// Format from the file extension (.ply, .xyz/.txt, .bin).
inline CloudFormat guess_cloud_format(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".ply") return CloudFormat::Ply;
  if (ext == ".xyz" || ext == ".txt") return CloudFormat::Xyz;
  if (ext == ".bin") return CloudFormat::KittiBin;
  throw ConfigError("cannot infer cloud format from '" + path.string() + "'; pass --format");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return data;
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

namespace ply {

enum class Type { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

inline Type parse_type(std::string_view name, std::uint64_t offset) {
  if (name == "char" || name == "int8") return Type::Int8;
  if (name == "uchar" || name == "uint8") return Type::UInt8;
  if (name == "short" || name == "int16") return Type::Int16;
  if (name == "ushort" || name == "uint16") return Type::UInt16;
  if (name == "int" || name == "int32") return Type::Int32;
  if (name == "uint" || name == "uint32") return Type::UInt32;
  if (name == "float" || name == "float32") return Type::Float32;
  if (name == "double" || name == "float64") return Type::Float64;
  throw ParseError("unknown PLY property type '" + std::string(name) + "'", offset);
}

inline std::size_t type_size(Type t) {
  switch (t) {
    case Type::Int8: case Type::UInt8: return 1;
    case Type::Int16: case Type::UInt16: return 2;
    case Type::Int32: case Type::UInt32: case Type::Float32: return 4;
    case Type::Float64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  Type type = Type::Float32;
  bool is_list = false;
  Type count_type = Type::UInt8;
};

struct Element {
  std::string name;
  std::uint64_t count = 0;
  std::vector<Property> properties;

  int find(std::string_view prop) const {
    for (std::size_t i = 0; i < properties.size(); ++i)
      if (properties[i].name == prop) return static_cast<int>(i);
    return -1;
  }
};

struct Header {
  bool binary = false;
  std::vector<Element> elements;
  std::size_t body_offset = 0;
};

template <typename T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

template <typename T>
void store_le(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(b, sizeof(T));
}

inline double load_scalar(Type t, const char* p) {
  switch (t) {
    case Type::Int8: return load_le<std::int8_t>(p);
    case Type::UInt8: return load_le<std::uint8_t>(p);
    case Type::Int16: return load_le<std::int16_t>(p);
    case Type::UInt16: return load_le<std::uint16_t>(p);
    case Type::Int32: return load_le<std::int32_t>(p);
    case Type::UInt32: return load_le<std::uint32_t>(p);
    case Type::Float32: return load_le<float>(p);
    case Type::Float64: return load_le<double>(p);
  }
  return 0.0;
}

inline Header parse_header(std::string_view data) {
  Header h;
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string_view {
    if (pos >= data.size()) throw ParseError("unexpected end of PLY header", pos);
    const std::size_t nl = data.find('\n', pos);
    if (nl == std::string_view::npos) throw ParseError("unterminated PLY header", data.size());
    std::string_view line = data.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    return line;
  };
  if (next_line() != "ply") throw ParseError("missing 'ply' magic", 0);
  bool have_format = false;
  for (;;) {
    const std::size_t line_start = pos;
    const std::string line(next_line());
    std::istringstream ss(line);
    std::string keyword;
    ss >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "end_header") break;
    if (keyword == "format") {
      std::string fmt, version;
      ss >> fmt >> version;
      if (fmt == "ascii") h.binary = false;
      else if (fmt == "binary_little_endian") h.binary = true;
      else if (fmt == "binary_big_endian")
        throw ParseError("big-endian PLY is not supported", line_start);
      else throw ParseError("unknown PLY format '" + fmt + "'", line_start);
      have_format = true;
    } else if (keyword == "element") {
      Element e;
      long long count = -1;
      ss >> e.name >> count;
      if (!ss || count < 0) throw ParseError("malformed element line", line_start);
      e.count = static_cast<std::uint64_t>(count);
      h.elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (h.elements.empty()) throw ParseError("property before any element", line_start);
      Property p;
      std::string type;
      ss >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ss >> count_type >> item_type >> p.name;
        p.is_list = true;
        p.count_type = parse_type(count_type, line_start);
        p.type = parse_type(item_type, line_start);
      } else {
        ss >> p.name;
        p.type = parse_type(type, line_start);
      }
      if (p.name.empty()) throw ParseError("malformed property line", line_start);
      h.elements.back().properties.push_back(std::move(p));
    } else {
      throw ParseError("unexpected PLY header keyword '" + keyword + "'", line_start);
    }
  }
  if (!have_format) throw ParseError("PLY header has no format line", 0);
  h.body_offset = pos;
  return h;
}

/// Sequential reader over the PLY body; every row is returned as a flat list
/// of doubles (list properties contribute their items, not their length).
class BodyReader {
 public:
  BodyReader(std::string_view data, const Header& h) : data_(data), binary_(h.binary), pos_(h.body_offset) {}

  std::uint64_t offset() const { return pos_; }

  void row(const Element& e, std::vector<double>& values, std::vector<std::size_t>& list_sizes) {
    values.clear();
    list_sizes.clear();
    for (const Property& p : e.properties) {
      if (p.is_list) {
        const auto n = static_cast<long long>(scalar(p.count_type));
        if (n < 0) throw ParseError("negative PLY list length", pos_);
        list_sizes.push_back(static_cast<std::size_t>(n));
        for (long long i = 0; i < n; ++i) values.push_back(scalar(p.type));
      } else {
        values.push_back(scalar(p.type));
      }
    }
  }

 private:
  double scalar(Type t) {
    if (binary_) {
      const std::size_t n = type_size(t);
      if (pos_ + n > data_.size()) throw ParseError("truncated PLY payload", pos_);
      const double v = load_scalar(t, data_.data() + pos_);
      pos_ += n;
      return v;
    }
    while (pos_ < data_.size() && std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (pos_ >= data_.size()) throw ParseError("truncated PLY payload", pos_);
    const char* begin = data_.data() + pos_;
    const char* end = data_.data() + data_.size();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() && ec != std::errc::result_out_of_range)
      throw ParseError("malformed PLY number", pos_);
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  std::string_view data_;
  bool binary_;
  std::uint64_t pos_;
};

}  // namespace ply

namespace detail {

inline TriangleMesh parse_ply(std::string_view data, bool want_faces) {
  const ply::Header h = ply::parse_header(data);
  ply::BodyReader body(data, h);
  TriangleMesh mesh;
  bool seen_vertex = false;
  std::vector<double> row;
  std::vector<std::size_t> lists;
  for (const ply::Element& e : h.elements) {
    if (e.name == "vertex") {
      const int ix = e.find("x"), iy = e.find("y"), iz = e.find("z");
      if (ix < 0 || iy < 0 || iz < 0) throw ParseError("PLY vertex element lacks x/y/z", h.body_offset);
      for (int i : {ix, iy, iz})
        if (e.properties[i].is_list) throw ParseError("PLY x/y/z must be scalar", h.body_offset);
      // x/y/z positions among the flattened values; lists before them shift indices
      bool list_before = false;
      for (int i = 0; i < std::max({ix, iy, iz}); ++i) list_before |= e.properties[i].is_list;
      if (list_before) throw ParseError("PLY list properties before x/y/z are not supported", h.body_offset);
      mesh.vertices.reserve(e.count);
      for (std::uint64_t r = 0; r < e.count; ++r) {
        body.row(e, row, lists);
        mesh.vertices.emplace_back(row[ix], row[iy], row[iz]);
      }
      seen_vertex = true;
      if (!want_faces) break;
    } else if (e.name == "face" && want_faces) {
      const int idx = std::max(e.find("vertex_indices"), e.find("vertex_index"));
      if (idx < 0 || !e.properties[idx].is_list) throw ParseError("PLY face element lacks vertex_indices", body.offset());
      for (std::uint64_t r = 0; r < e.count; ++r) {
        const std::uint64_t at = body.offset();
        body.row(e, row, lists);
        std::size_t first = 0, list_no = 0;
        for (int i = 0; i < idx; ++i) first += e.properties[i].is_list ? lists[list_no++] : 1;
        const std::size_t n = lists[list_no];
        if (n < 3) throw ParseError("PLY face with fewer than 3 vertices", at);
        for (std::size_t j = 1; j + 1 < n; ++j) {
          std::array<std::int32_t, 3> tri{static_cast<std::int32_t>(row[first]),
                                          static_cast<std::int32_t>(row[first + j]),
                                          static_cast<std::int32_t>(row[first + j + 1])};
          for (auto v : tri)
            if (v < 0) throw ParseError("negative PLY face index", at);
          mesh.triangles.push_back(tri);
        }
      }
    } else {
      for (std::uint64_t r = 0; r < e.count; ++r) body.row(e, row, lists);
    }
  }
  if (!seen_vertex) throw ParseError("PLY file has no vertex element", h.body_offset);
  for (const auto& t : mesh.triangles)
    for (auto v : t)
      if (static_cast<std::size_t>(v) >= mesh.vertices.size())
        throw ParseError("PLY face index out of range", body.offset());
  return mesh;
}

inline std::vector<Vec3> parse_xyz(std::string_view data) {
  std::vector<Vec3> points;
  std::size_t pos = 0;
  while (pos < data.size()) {
    std::size_t nl = data.find('\n', pos);
    if (nl == std::string_view::npos) nl = data.size();
    const std::string_view line = data.substr(pos, nl - pos);
    std::size_t i = 0;
    auto skip_ws = [&] {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == ',')) ++i;
    };
    skip_ws();
    if (i < line.size() && line[i] != '#') {
      double xyz[3];
      for (double& c : xyz) {
        skip_ws();
        const auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), c);
        if (ec != std::errc() && ec != std::errc::result_out_of_range)
          throw ParseError("malformed xyz row", pos + i);
        i = static_cast<std::size_t>(ptr - line.data());
      }
      points.emplace_back(xyz[0], xyz[1], xyz[2]);
    }
    pos = nl + 1;
  }
  return points;
}

inline std::vector<Vec3> parse_kitti(std::string_view data) {
  constexpr std::size_t kRecord = 4 * sizeof(float);
  if (data.size() % kRecord != 0)
    throw ParseError("truncated kitti-bin payload", data.size() - data.size() % kRecord);
  std::vector<Vec3> points;
  points.reserve(data.size() / kRecord);
  for (std::size_t off = 0; off < data.size(); off += kRecord) {
    const char* p = data.data() + off;
    points.emplace_back(ply::load_le<float>(p), ply::load_le<float>(p + 4), ply::load_le<float>(p + 8));
  }
  return points;
}

}  // namespace detail

/// Loads a point cloud; non-finite rows are dropped and counted.
inline PointCloud read_cloud(const std::filesystem::path& path, CloudFormat format,
                             const Vec3& sensor_pose = Vec3::Zero()) {
  const std::string data = read_file(path);
  std::vector<Vec3> raw;
  try {
    switch (format) {
      case CloudFormat::Ply: raw = detail::parse_ply(data, false).vertices; break;
      case CloudFormat::Xyz: raw = detail::parse_xyz(data); break;
      case CloudFormat::KittiBin: raw = detail::parse_kitti(data); break;
    }
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
  PointCloud cloud;
  cloud.sensor_pose = sensor_pose;
  cloud.points.reserve(raw.size());
  for (const Vec3& p : raw) {
    if (is_finite(p)) cloud.points.push_back(p);
    else ++cloud.dropped;
  }
  return cloud;
}

inline TriangleMesh read_mesh(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  try {
    return detail::parse_ply(data, true);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

/// Binary little-endian PLY: float32 x/y/z and int32 vertex_indices.
inline std::string encode_mesh(const TriangleMesh& mesh) {
  std::string out;
  out += "ply\nformat binary_little_endian 1.0\ncomment voxsurf mesh\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  out += "element face " + std::to_string(mesh.triangles.size()) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  out.reserve(out.size() + mesh.vertices.size() * 12 + mesh.triangles.size() * 13);
  for (const Vec3& v : mesh.vertices)
    for (int i = 0; i < 3; ++i) ply::store_le(out, static_cast<float>(v[i]));
  for (const auto& t : mesh.triangles) {
    ply::store_le<std::uint8_t>(out, 3);
    for (auto idx : t) ply::store_le<std::int32_t>(out, idx);
  }
  return out;
}

inline void write_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
  write_file(path, encode_mesh(mesh));
}

/// Binary little-endian PLY point cloud. Double precision by default so that
/// analytic ground truth survives the round trip.
inline std::string encode_cloud(const std::vector<Vec3>& points, bool double_precision = true) {
  std::string out;
  const char* type = double_precision ? "double" : "float";
  out += "ply\nformat binary_little_endian 1.0\ncomment voxsurf cloud\n";
  out += "element vertex " + std::to_string(points.size()) + "\n";
  for (const char* axis : {"x", "y", "z"}) out += std::string("property ") + type + " " + axis + "\n";
  out += "end_header\n";
  out.reserve(out.size() + points.size() * (double_precision ? 24 : 12));
  for (const Vec3& p : points)
    for (int i = 0; i < 3; ++i) {
      if (double_precision) ply::store_le(out, p[i]);
      else ply::store_le(out, static_cast<float>(p[i]));
    }
  return out;
}

inline void write_cloud(const std::vector<Vec3>& points, const std::filesystem::path& path,
                        bool double_precision = true) {
  write_file(path, encode_cloud(points, double_precision));
}

}  // namespace voxsurf
