#pragma once

// Command-line front end: `reconstruct`, `eval` and `synth`. Kept in a header
// so the test suites can drive the same code path as the executable.

#include "voxsurf/io.hpp"
#include "voxsurf/metrics.hpp"
#include "voxsurf/pipeline.hpp"
#include "voxsurf/synth.hpp"
#include "voxsurf/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace voxsurf::app {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitIo = 2;

inline Vec3 parse_vec3(const std::string& text) {
  Vec3 v;
  std::stringstream ss(text);
  std::string part;
  int i = 0;
  while (std::getline(ss, part, ',')) {
    if (i >= 3) throw ConfigError("expected x,y,z but got '" + text + "'");
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size())
      throw ConfigError("expected x,y,z but got '" + text + "'");
    v[i++] = value;
  }
  if (i != 3 || !v.allFinite()) throw ConfigError("expected x,y,z but got '" + text + "'");
  return v;
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 json_vec(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(what) + " must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json load_json(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void write_json(const json& j, const fs::path& path) { write_file(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Scene files

inline json scene_to_json(const Scene& scene) {
  json prims = json::array();
  for (const auto& prim : scene.primitives) {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, GroundPlane>)
            prims.push_back({{"type", "ground"}, {"z", p.z}});
          else if constexpr (std::is_same_v<T, Box>)
            prims.push_back({{"type", "box"}, {"min", vec_json(p.min)}, {"max", vec_json(p.max)}});
          else if constexpr (std::is_same_v<T, Sphere>)
            prims.push_back({{"type", "sphere"}, {"center", vec_json(p.center)}, {"radius", p.radius}});
          else
            prims.push_back({{"type", "cylinder"}, {"base", vec_json(p.base)}, {"radius", p.radius},
                             {"height", p.height}});
        },
        prim);
  }
  return prims;
}

inline Scene scene_from_json(const json& j) {
  Scene scene;
  for (const json& p : j) {
    const std::string type = p.at("type").get<std::string>();
    if (type == "ground") scene.primitives.push_back(GroundPlane{p.value("z", 0.0)});
    else if (type == "box")
      scene.primitives.push_back(Box{json_vec(p.at("min"), "box.min"), json_vec(p.at("max"), "box.max")});
    else if (type == "sphere")
      scene.primitives.push_back(Sphere{json_vec(p.at("center"), "sphere.center"), p.at("radius").get<double>()});
    else if (type == "cylinder")
      scene.primitives.push_back(Cylinder{json_vec(p.at("base"), "cylinder.base"), p.at("radius").get<double>(),
                                          p.at("height").get<double>()});
    else throw ConfigError("unknown primitive type '" + type + "'");
  }
  scene.validate();
  return scene;
}

inline json scanner_to_json(const ScannerSpec& s) {
  return {{"origin", vec_json(s.origin)}, {"layers", s.layers},
          {"fov", json::array({s.fov_min_deg, s.fov_max_deg})},
          {"steps", s.horizontal_steps}, {"range", s.range_max}, {"noise", s.noise_sigma}};
}

inline void apply_scanner_json(const json& j, ScannerSpec& s) {
  if (j.contains("origin")) s.origin = json_vec(j["origin"], "scanner.origin");
  if (j.contains("layers")) s.layers = j["layers"].get<int>();
  if (j.contains("fov")) {
    s.fov_min_deg = j["fov"].at(0).get<double>();
    s.fov_max_deg = j["fov"].at(1).get<double>();
  }
  if (j.contains("steps")) s.horizontal_steps = j["steps"].get<int>();
  if (j.contains("range")) s.range_max = j["range"].get<double>();
  if (j.contains("noise")) s.noise_sigma = j["noise"].get<double>();
}

// ---------------------------------------------------------------------------
// Commands

struct ReconstructArgs {
  std::string input, output, format, config, manifest, sensor, method, mode, confidence;
  double alpha = 0.2, tau = 0.2, truncation = 0.0, imls_radius = 0.0, imls_h = 0.0;
  std::uint64_t nmin = 10;
  int kmax = 5, fixed_k = 1, imls_k = 0;
  unsigned threads = 0;
};

struct EvalArgs {
  std::string mesh, gt, gt_format, sensor, prefix;
  double bin_width = 1.0, delta_step = 0.01, delta_max = 1.0;
  unsigned threads = 0;
};

struct SynthArgs {
  std::string scene, out_dir = ".";
  std::uint64_t seed = 0;
  double noise = 0.01, range = 0.0;
  int layers = 0, steps = 0, dense_layers = 0, dense_steps = 0;
  unsigned threads = 0;
};

inline fs::path manifest_path_for(const fs::path& output) {
  fs::path p = output;
  p.replace_extension(".manifest.json");
  return p;
}

inline int cmd_reconstruct(const ReconstructArgs& a, const CLI::App& sub, std::ostream& out) {
  using Clock = std::chrono::steady_clock;
  const auto given = [&](const char* name) { return sub.count(name) > 0; };

  // config file first, flags on top
  json file_cfg = json::object();
  if (!a.config.empty()) file_cfg = load_json(a.config);

  ReconstructionConfig cfg;
  Method method = Method::Adaptive;
  Vec3 sensor = Vec3::Zero();
  std::string format;
  ImlsConfig imls;
  bool imls_radius_set = false, imls_h_set = false, imls_k_set = false;
  unsigned threads = 0;
  try {
    cfg.alpha = file_cfg.value("alpha", cfg.alpha);
    cfg.tau = file_cfg.value("tau", cfg.tau);
    cfg.n_min = file_cfg.value("nmin", cfg.n_min);
    cfg.k_max = file_cfg.value("kmax", cfg.k_max);
    cfg.fixed_k = file_cfg.value("fixed_k", cfg.fixed_k);
    cfg.truncation = file_cfg.value("truncation", cfg.truncation);
    if (file_cfg.contains("mode")) cfg.mode = parse_mode(file_cfg["mode"].get<std::string>());
    if (file_cfg.contains("confidence")) cfg.confidence = parse_confidence(file_cfg["confidence"].get<std::string>());
    if (file_cfg.contains("method")) method = parse_method(file_cfg["method"].get<std::string>());
    if (file_cfg.contains("sensor")) sensor = json_vec(file_cfg["sensor"], "sensor");
    format = file_cfg.value("format", std::string());
    threads = file_cfg.value("threads", 0u);
    if (file_cfg.contains("imls")) {
      const json& ij = file_cfg["imls"];
      if (ij.contains("radius")) imls.radius = ij["radius"].get<double>(), imls_radius_set = true;
      if (ij.contains("h")) imls.h = ij["h"].get<double>(), imls_h_set = true;
      if (ij.contains("k")) imls.k_neighbors = ij["k"].get<int>(), imls_k_set = true;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config file: ") + e.what());
  }

  if (given("--alpha")) cfg.alpha = a.alpha;
  if (given("--tau")) cfg.tau = a.tau;
  if (given("--nmin")) cfg.n_min = a.nmin;
  if (given("--kmax")) cfg.k_max = a.kmax;
  if (given("--fixed-k")) cfg.fixed_k = a.fixed_k;
  if (given("--truncation")) cfg.truncation = a.truncation;
  if (given("--mode")) cfg.mode = parse_mode(a.mode);
  if (given("--confidence")) cfg.confidence = parse_confidence(a.confidence);
  if (given("--method")) method = parse_method(a.method);
  if (given("--sensor")) sensor = parse_vec3(a.sensor);
  if (given("--format")) format = a.format;
  if (given("--threads")) threads = a.threads;
  if (given("--imls-radius")) imls.radius = a.imls_radius, imls_radius_set = true;
  if (given("--imls-h")) imls.h = a.imls_h, imls_h_set = true;
  if (given("--imls-k")) imls.k_neighbors = a.imls_k, imls_k_set = true;
  cfg.validate();

  // unset IMLS parameters follow the adaptive configuration
  const ImlsConfig matched = ImlsConfig::matching(cfg);
  if (!imls_radius_set) imls.radius = matched.radius;
  if (!imls_h_set) imls.h = imls.radius / 3.0;
  if (!imls_k_set) imls.k_neighbors = matched.k_neighbors;
  imls.truncation = cfg.effective_truncation();
  imls.reach = cfg.k_max;
  if (method == Method::Imls) imls.validate();

  set_thread_count(threads);
  const CloudFormat fmt = format.empty() ? guess_cloud_format(a.input) : parse_cloud_format(format);

  const auto t0 = Clock::now();
  const std::string input_bytes = read_file(a.input);
  const PointCloud cloud = read_cloud(a.input, fmt, sensor);
  const double read_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  Reconstruction rec = reconstruct(cloud.points, sensor, cfg, method, &imls);

  const auto t1 = Clock::now();
  write_mesh(rec.mesh, a.output);
  rec.timings_ms["read"] = read_ms;
  rec.timings_ms["write"] = std::chrono::duration<double, std::milli>(Clock::now() - t1).count();

  json resolved = {{"alpha", cfg.alpha},
                   {"tau", cfg.tau},
                   {"nmin", cfg.n_min},
                   {"kmax", cfg.k_max},
                   {"mode", std::string(to_string(cfg.mode))},
                   {"fixed_k", cfg.fixed_k},
                   {"truncation", cfg.effective_truncation()},
                   {"confidence", std::string(to_string(cfg.confidence))},
                   {"method", std::string(to_string(method))},
                   {"sensor", vec_json(sensor)},
                   {"threads", threads}};
  if (method == Method::Imls) resolved["imls"] = {{"radius", imls.radius}, {"h", imls.h}, {"k", imls.k_neighbors}};

  const fs::path manifest = a.manifest.empty() ? manifest_path_for(a.output) : fs::path(a.manifest);
  json m = {{"tool", "voxsurf"},
            {"version", kVersion},
            {"command", "reconstruct"},
            {"config", resolved},
            {"inputs", json::array({{{"path", a.input}, {"fnv1a64", fnv1a64_hex(input_bytes)}}})},
            {"outputs", {{"mesh", a.output}}},
            {"timings_ms", rec.timings_ms},
            {"stats",
             {{"points", cloud.points.size()},
              {"dropped_non_finite", cloud.dropped},
              {"occupied_voxels", rec.occupied_voxels},
              {"defined_vertices", rec.defined_vertices},
              {"mesh_vertices", rec.mesh.vertices.size()},
              {"triangles", rec.mesh.triangles.size()}}}};
  if (!a.config.empty())
    m["inputs"].push_back({{"path", a.config}, {"fnv1a64", fnv1a64_hex(read_file(a.config))}});
  write_json(m, manifest);

  if (cloud.dropped > 0) out << "warning: dropped " << cloud.dropped << " non-finite points\n";
  out << "mesh: " << rec.mesh.vertices.size() << " vertices, " << rec.mesh.triangles.size() << " triangles -> "
      << a.output << "\n";
  return kExitOk;
}

inline std::string metrics_csv(const MetricsReport& r) {
  std::string s = "metric,direction,value\n";
  const auto row = [&](const char* metric, const char* dir, double v) {
    s += std::string(metric) + "," + dir + "," + format_double(v) + "\n";
  };
  row("ae", "p_to_gt", r.ae_p_to_gt);
  row("ae", "gt_to_p", r.ae_gt_to_p);
  row("ae", "sym", r.ae_sym);
  row("hd", "p_to_gt", r.hd_p_to_gt);
  row("hd", "gt_to_p", r.hd_gt_to_p);
  row("hd", "sym", r.hd_sym);
  return s;
}

inline std::string pairs_csv(const char* a, const char* b, const std::vector<std::pair<double, double>>& rows) {
  std::string s = std::string(a) + "," + b + "\n";
  for (const auto& [x, y] : rows) s += format_double(x) + "," + format_double(y) + "\n";
  return s;
}

inline std::string metrics_text(const MetricsReport& r) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(4);
  ss << "             P->GT      GT->P      sym\n";
  ss << "AE (m)   " << std::setw(9) << r.ae_p_to_gt << "  " << std::setw(9) << r.ae_gt_to_p << "  " << std::setw(9)
     << r.ae_sym << "\n";
  ss << "HD (m)   " << std::setw(9) << r.hd_p_to_gt << "  " << std::setw(9) << r.hd_gt_to_p << "  " << std::setw(9)
     << r.hd_sym << "\n";
  return ss.str();
}

/// Parses the `metric,direction,value` CSV written by `eval`.
inline MetricsReport parse_metrics_csv(const std::string& text) {
  MetricsReport r;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != "metric,direction,value") throw ParseError("unexpected metrics CSV header", 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(','), c2 = line.rfind(',');
    const std::string metric = line.substr(0, c1), dir = line.substr(c1 + 1, c2 - c1 - 1);
    double v = 0.0;
    std::from_chars(line.data() + c2 + 1, line.data() + line.size(), v);
    double* slot = nullptr;
    if (metric == "ae") slot = dir == "p_to_gt" ? &r.ae_p_to_gt : dir == "gt_to_p" ? &r.ae_gt_to_p : &r.ae_sym;
    else if (metric == "hd") slot = dir == "p_to_gt" ? &r.hd_p_to_gt : dir == "gt_to_p" ? &r.hd_gt_to_p : &r.hd_sym;
    if (slot) *slot = v;
  }
  return r;
}

inline int cmd_eval(const EvalArgs& a, const CLI::App& sub, std::ostream& out) {
  set_thread_count(a.threads);
  const Vec3 sensor = sub.count("--sensor") ? parse_vec3(a.sensor) : Vec3::Zero();
  if (!(a.delta_step > 0.0) || !(a.delta_max >= 0.0)) throw ConfigError("delta step must be > 0 and max >= 0");
  if (!(a.bin_width > 0.0)) throw ConfigError("bin width must be > 0");

  const TriangleMesh mesh = read_mesh(a.mesh);
  const CloudFormat gt_fmt = a.gt_format.empty() ? guess_cloud_format(a.gt) : parse_cloud_format(a.gt_format);
  const PointCloud gt = read_cloud(a.gt, gt_fmt, sensor);
  if (mesh.vertices.empty()) throw InputError("predicted mesh has no vertices");
  if (gt.points.empty()) throw InputError("ground-truth cloud is empty");

  const auto thresholds = default_delta_thresholds(a.delta_step, a.delta_max);
  const MetricsReport report = evaluate(mesh.vertices, gt.points, sensor, thresholds, a.bin_width);

  fs::path prefix = a.prefix;
  if (prefix.empty()) {
    prefix = fs::path(a.mesh);
    prefix.replace_extension();
    prefix += "_eval";
  }
  const fs::path metrics = prefix.string() + "_metrics.csv";
  const fs::path delta = prefix.string() + "_delta.csv";
  const fs::path range = prefix.string() + "_range.csv";
  const fs::path text = prefix.string() + "_report.txt";
  write_file(metrics, metrics_csv(report));
  write_file(delta, pairs_csv("threshold", "fraction", report.delta_curve));
  write_file(range, pairs_csv("range_bin", "mean_error", report.range_profile));
  write_file(text, metrics_text(report));

  json m = {{"tool", "voxsurf"},
            {"version", kVersion},
            {"command", "eval"},
            {"config",
             {{"sensor", vec_json(sensor)},
              {"bin_width", a.bin_width},
              {"delta_step", a.delta_step},
              {"delta_max", a.delta_max}}},
            {"inputs",
             json::array({{{"path", a.mesh}, {"fnv1a64", fnv1a64_hex(read_file(a.mesh))}},
                          {{"path", a.gt}, {"fnv1a64", fnv1a64_hex(read_file(a.gt))}}})},
            {"outputs",
             {{"metrics", metrics.string()}, {"delta", delta.string()}, {"range", range.string()},
              {"report", text.string()}}}};
  write_json(m, prefix.string() + "_manifest.json");

  out << "AE_sym " << format_double(report.ae_sym) << " m\n";
  out << "HD_sym " << format_double(report.hd_sym) << " m\n";
  return kExitOk;
}

inline int cmd_synth(const SynthArgs& a, const CLI::App& sub, std::ostream& out) {
  set_thread_count(a.threads);
  Scene scene = default_scene();
  ScannerSpec sparse;
  sparse.noise_sigma = a.noise;
  std::optional<json> dense_json;
  if (!a.scene.empty()) {
    const json j = load_json(a.scene);
    try {
      if (j.contains("primitives")) scene = scene_from_json(j["primitives"]);
      if (j.contains("scanner")) apply_scanner_json(j["scanner"], sparse);
      if (j.contains("dense")) dense_json = j["dense"];
    } catch (const json::exception& e) {
      throw ConfigError(a.scene + ": " + e.what());
    }
  }
  if (sub.count("--noise")) sparse.noise_sigma = a.noise;
  if (sub.count("--layers")) sparse.layers = a.layers;
  if (sub.count("--steps")) sparse.horizontal_steps = a.steps;
  if (sub.count("--range")) sparse.range_max = a.range;
  ScannerSpec dense = dense_scanner(sparse);
  if (dense_json) {
    try {
      apply_scanner_json(*dense_json, dense);
    } catch (const json::exception& e) {
      throw ConfigError(a.scene + ": " + e.what());
    }
  }
  if (sub.count("--dense-layers")) dense.layers = a.dense_layers;
  if (sub.count("--dense-steps")) dense.horizontal_steps = a.dense_steps;
  scene.validate();
  sparse.validate();
  dense.validate();

  const PointCloud sparse_cloud = scan(scene, sparse, a.seed);
  const PointCloud gt = ground_truth_cloud(scene, dense);

  const fs::path dir = a.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  write_cloud(sparse_cloud.points, dir / "sparse.ply");
  write_cloud(gt.points, dir / "gt.ply");

  json m = {{"tool", "voxsurf"},
            {"version", kVersion},
            {"command", "synth"},
            {"seed", a.seed},
            {"primitives", scene_to_json(scene)},
            {"scanner", scanner_to_json(sparse)},
            {"dense", scanner_to_json(dense)},
            {"outputs",
             {{"sparse", (dir / "sparse.ply").string()},
              {"gt", (dir / "gt.ply").string()},
              {"sparse_points", sparse_cloud.points.size()},
              {"gt_points", gt.points.size()}}}};
  write_json(m, dir / "manifest.json");
  out << "sparse: " << sparse_cloud.points.size() << " points, gt: " << gt.points.size() << " points -> "
      << dir.string() << "\n";
  return kExitOk;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Surface reconstruction from single-viewpoint Lidar scans"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ReconstructArgs ra;
  auto* rec = app.add_subcommand("reconstruct", "Point cloud -> TSDF -> marching cubes mesh");
  rec->add_option("-i,--input", ra.input, "Input point cloud")->required();
  rec->add_option("-o,--output", ra.output, "Output mesh (binary PLY)")->required();
  rec->add_option("--format", ra.format, "ply | xyz | kitti-bin (default: from extension)");
  rec->add_option("--config", ra.config, "JSON config file; flags override its values");
  rec->add_option("--manifest", ra.manifest, "Run manifest path (default: <output>.manifest.json)");
  rec->add_option("--alpha", ra.alpha, "Voxel size in meters")->capture_default_str();
  rec->add_option("--tau", ra.tau, "Gaussian confidence threshold")->capture_default_str();
  rec->add_option("--nmin", ra.nmin, "Minimum points per neighborhood")->capture_default_str();
  rec->add_option("--kmax", ra.kmax, "Largest neighborhood level")->capture_default_str();
  rec->add_option("--mode", ra.mode, "an-gc | an | cn-gc | cn");
  rec->add_option("--fixed-k", ra.fixed_k, "Neighborhood level for constant modes");
  rec->add_option("--method", ra.method, "adaptive | imls");
  rec->add_option("--sensor", ra.sensor, "Sensor position x,y,z (default 0,0,0)");
  rec->add_option("--truncation", ra.truncation, "TSDF truncation in meters (default alpha*kmax)");
  rec->add_option("--confidence", ra.confidence, "peak | raw");
  rec->add_option("--imls-radius", ra.imls_radius, "IMLS neighborhood radius (default alpha*kmax)");
  rec->add_option("--imls-h", ra.imls_h, "IMLS bandwidth (default radius/3)");
  rec->add_option("--imls-k", ra.imls_k, "IMLS k-nearest normals (default nmin)");
  rec->add_option("--threads", ra.threads, "Worker threads (0 = auto)");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Compare mesh vertices against a ground-truth cloud");
  ev->add_option("-m,--mesh", ea.mesh, "Predicted mesh (PLY)")->required();
  ev->add_option("-g,--gt", ea.gt, "Ground-truth point cloud")->required();
  ev->add_option("--gt-format", ea.gt_format, "ply | xyz | kitti-bin (default: from extension)");
  ev->add_option("--sensor", ea.sensor, "Sensor position x,y,z for the range profile");
  ev->add_option("--out-prefix", ea.prefix, "Output prefix (default: <mesh>_eval)");
  ev->add_option("--bin-width", ea.bin_width, "Range profile bin width in meters")->capture_default_str();
  ev->add_option("--delta-step", ea.delta_step, "Delta curve threshold step")->capture_default_str();
  ev->add_option("--delta-max", ea.delta_max, "Delta curve largest threshold")->capture_default_str();
  ev->add_option("--threads", ea.threads, "Worker threads (0 = auto)");

  SynthArgs sa;
  auto* sy = app.add_subcommand("synth", "Simulate a sparse scan and a dense ground truth");
  sy->add_option("--scene", sa.scene, "Scene JSON (default: built-in scene)");
  sy->add_option("--seed", sa.seed, "Noise seed")->capture_default_str();
  sy->add_option("--out-dir", sa.out_dir, "Output directory")->capture_default_str();
  sy->add_option("--noise", sa.noise, "Range noise sigma in meters")->capture_default_str();
  sy->add_option("--layers", sa.layers, "Sparse scanner layers");
  sy->add_option("--steps", sa.steps, "Sparse scanner azimuth steps");
  sy->add_option("--range", sa.range, "Maximum range in meters");
  sy->add_option("--dense-layers", sa.dense_layers, "Ground-truth scanner layers");
  sy->add_option("--dense-steps", sa.dense_steps, "Ground-truth scanner azimuth steps");
  sy->add_option("--threads", sa.threads, "Worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*rec) return cmd_reconstruct(ra, *rec, out);
    if (*ev) return cmd_eval(ea, *ev, out);
    if (*sy) return cmd_synth(sa, *sy, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"voxsurf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace voxsurf::app
