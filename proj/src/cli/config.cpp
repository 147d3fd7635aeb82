#include "wavesrc/config.hpp"

#include <fstream>
#include <sstream>

#include "wavesrc/error.hpp"

namespace wavesrc {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError("expected an object", path);
  const auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError("missing required field", join(path, key));
  return *it;
}

template <typename T>
T as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("wrong type (") + e.what() + ")", path);
  }
}

template <typename T>
T required(const json& obj, const std::string& key, const std::string& path) {
  return as<T>(member(obj, key, path), join(path, key));
}

template <typename T>
T optional(const json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.is_object()) throw ValidationError("expected an object", path);
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return as<T>(*it, join(path, key));
}

Vec3 vec3(const json& j, const std::string& path) {
  const auto v = as<std::vector<double>>(j, path);
  if (v.size() != 3) throw ValidationError("expected [x, y, z]", path);
  return {v[0], v[1], v[2]};
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

std::vector<Vec3> vec3_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError("expected an array of [x, y, z]", path);
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vec3(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

json vec3_list_json(std::span<const Vec3> pts) {
  json a = json::array();
  for (const Vec3& p : pts) a.push_back(vec3_json(p));
  return a;
}

/// Re-tags ValidationErrors raised by domain constructors with `path`.
template <typename F>
auto in_field(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    if (e.field().rfind(path, 0) == 0) throw;
    throw ValidationError(e.what(), path);
  }
}

// ---------------------------------------------------------------------------

SensorSpec sensors_from_json(const json& j, const std::string& path) {
  SensorSpec s;
  const auto kind = required<std::string>(j, "kind", path);
  if (kind == "sphere") {
    s.kind = SensorSpec::Kind::Sphere;
    s.radius = required<double>(j, "radius", path);
    s.n_phi = required<std::size_t>(j, "n_phi", path);
    s.n_theta = required<std::size_t>(j, "n_theta", path);
    s.phi_indices = optional<std::vector<std::size_t>>(j, "phi_indices", path, {});
    s.theta_indices = optional<std::vector<std::size_t>>(j, "theta_indices", path, {});
  } else if (kind == "points") {
    s.kind = SensorSpec::Kind::Points;
    s.points = vec3_list(member(j, "points", path), join(path, "points"));
  } else {
    throw ValidationError("unknown kind '" + kind + "' (sphere | points)", join(path, "kind"));
  }
  in_field(path, [&] { return s.build(); });
  return s;
}

json to_json(const SensorSpec& s) {
  if (s.kind == SensorSpec::Kind::Points) return {{"kind", "points"}, {"points", vec3_list_json(s.points)}};
  json j = {{"kind", "sphere"}, {"radius", s.radius}, {"n_phi", s.n_phi}, {"n_theta", s.n_theta}};
  if (!s.phi_indices.empty()) j["phi_indices"] = s.phi_indices;
  if (!s.theta_indices.empty()) j["theta_indices"] = s.theta_indices;
  return j;
}

Trajectory trajectory_from_json(const json& j, const std::string& path) {
  const auto kind = required<std::string>(j, "kind", path);
  return in_field(path, [&]() -> Trajectory {
    if (kind == "stationary") return Trajectory(StationaryPath{vec3(member(j, "position", path), join(path, "position"))});
    if (kind == "circle_modulated") {
      CircleModulatedPath p;
      p.radius = optional(j, "radius", path, p.radius);
      p.amplitude = optional(j, "amplitude", path, p.amplitude);
      p.lobes = optional(j, "lobes", path, p.lobes);
      return Trajectory(p);
    }
    if (kind == "helix") {
      HelixPath p;
      p.radius = optional(j, "radius", path, p.radius);
      p.omega = optional(j, "omega", path, p.omega);
      return Trajectory(p);
    }
    if (kind == "expanding_helix") {
      ExpandingHelixPath p;
      p.radius = optional(j, "radius", path, p.radius);
      p.omega = optional(j, "omega", path, p.omega);
      return Trajectory(p);
    }
    if (kind == "piecewise_linear") {
      PiecewiseLinearPath p;
      p.times = required<std::vector<double>>(j, "times", path);
      p.points = vec3_list(member(j, "points", path), join(path, "points"));
      return Trajectory(p);
    }
    throw ValidationError(
        "unknown kind '" + kind + "' (stationary | circle_modulated | helix | expanding_helix | piecewise_linear)",
        join(path, "kind"));
  });
}

json to_json(const Trajectory& traj) {
  return std::visit(
      [](const auto& p) -> json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, StationaryPath>) {
          return {{"kind", "stationary"}, {"position", vec3_json(p.position)}};
        } else if constexpr (std::is_same_v<P, CircleModulatedPath>) {
          return {{"kind", "circle_modulated"}, {"radius", p.radius}, {"amplitude", p.amplitude}, {"lobes", p.lobes}};
        } else if constexpr (std::is_same_v<P, HelixPath>) {
          return {{"kind", "helix"}, {"radius", p.radius}, {"omega", p.omega}};
        } else if constexpr (std::is_same_v<P, ExpandingHelixPath>) {
          return {{"kind", "expanding_helix"}, {"radius", p.radius}, {"omega", p.omega}};
        } else {
          return {{"kind", "piecewise_linear"}, {"times", p.times}, {"points", vec3_list_json(p.points)}};
        }
      },
      traj.kind());
}

}  // namespace

// ---------------------------------------------------------------------------

SensorArray SensorSpec::build() const {
  if (kind == Kind::Points) return SensorArray(points);
  return sphere_sensors(radius, n_phi, n_theta, phi_indices, theta_indices);
}

bool operator==(const RetardedSolveParams& a, const RetardedSolveParams& b) {
  return a.tolerance == b.tolerance && a.max_iterations == b.max_iterations;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.wave_speed == b.wave_speed && a.signal == b.signal && a.sensors == b.sensors && a.time == b.time &&
         a.static_sources == b.static_sources && a.trajectory == b.trajectory && a.grid == b.grid &&
         a.noise == b.noise && a.solver == b.solver && a.postprocess == b.postprocess && a.retarded == b.retarded;
}

json to_json(const Signal& sig) {
  if (const auto* p = std::get_if<GaussianModulatedSine>(&sig.kind()))
    return {{"kind", "gaussian_modulated_sine"}, {"omega", p->omega}, {"center", p->center}, {"decay", p->decay}};
  const auto& t = std::get<TabulatedSignal>(sig.kind());
  return {{"kind", "tabulated"}, {"times", t.times}, {"values", t.values}};
}

Signal signal_from_json(const json& j, const std::string& path) {
  const auto kind = required<std::string>(j, "kind", path);
  return in_field(path, [&]() -> Signal {
    if (kind == "gaussian_modulated_sine") {
      GaussianModulatedSine p;
      p.omega = optional(j, "omega", path, p.omega);
      p.center = optional(j, "center", path, p.center);
      p.decay = optional(j, "decay", path, p.decay);
      return Signal(p);
    }
    if (kind == "tabulated")
      return Signal(TabulatedSignal{required<std::vector<double>>(j, "times", path),
                                    required<std::vector<double>>(j, "values", path)});
    throw ValidationError("unknown kind '" + kind + "' (gaussian_modulated_sine | tabulated)", join(path, "kind"));
  });
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ValidationError("configuration must be a JSON object");
  ExperimentConfig cfg;

  cfg.wave_speed = required<double>(member(doc, "physics", ""), "c", "physics");
  if (!(cfg.wave_speed > 0.0)) throw ValidationError("must be > 0", "physics.c");

  if (doc.contains("signal")) cfg.signal = signal_from_json(doc["signal"]);
  cfg.sensors = sensors_from_json(member(doc, "sensors", ""), "sensors");

  const json& time = member(doc, "time", "");
  cfg.time = in_field("time", [&] {
    return TimeGrid(required<double>(time, "T", "time"), required<std::size_t>(time, "N_T", "time"));
  });

  if (doc.contains("sources") && !doc["sources"].is_null()) {
    const json& src = doc["sources"];
    const auto kind = required<std::string>(src, "kind", "sources");
    if (kind == "static") {
      const json& list = member(src, "points", "sources");
      if (!list.is_array()) throw ValidationError("expected an array", "sources.points");
      std::vector<PointSource> pts;
      for (std::size_t j = 0; j < list.size(); ++j) {
        const std::string p = "sources.points[" + std::to_string(j) + "]";
        pts.push_back({vec3(member(list[j], "location", p), p + ".location"), optional(list[j], "intensity", p, 1.0)});
      }
      cfg.static_sources = in_field("sources", [&] { return StaticSourceSet(pts); });
    } else if (kind == "trajectory") {
      cfg.trajectory = trajectory_from_json(member(src, "path", "sources"), "sources.path");
    } else {
      throw ValidationError("unknown kind '" + kind + "' (static | trajectory)", "sources.kind");
    }
  }

  const json& grid = member(doc, "grid", "");
  const auto res = required<std::vector<std::size_t>>(grid, "resolution", "grid");
  if (res.size() != 3) throw ValidationError("expected [n1, n2, n3]", "grid.resolution");
  cfg.grid = in_field("grid", [&] {
    return SamplingGrid(vec3(member(grid, "lower", "grid"), "grid.lower"),
                        vec3(member(grid, "upper", "grid"), "grid.upper"), {res[0], res[1], res[2]});
  });

  if (doc.contains("noise")) {
    const json& n = doc["noise"];
    cfg.noise.level = optional(n, "level", "noise", 0.0);
    cfg.noise.seed = optional<std::uint64_t>(n, "seed", "noise", 0);
    if (!(cfg.noise.level >= 0.0)) throw ValidationError("must be >= 0", "noise.level");
  }

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    SolverOptions& o = cfg.solver;
    o.max_iterations = optional(s, "max_iterations", "solver", o.max_iterations);
    o.tolerance = optional(s, "tolerance", "solver", o.tolerance);
    o.tikhonov = optional(s, "tikhonov", "solver", o.tikhonov);
    o.intensity_threshold = optional(s, "intensity_threshold", "solver", o.intensity_threshold);
    o.isosurface_fraction = optional(s, "isosurface_fraction", "solver", o.isosurface_fraction);
    o.max_peaks = optional(s, "max_peaks", "solver", o.max_peaks);
    o.kernel_cache_bytes = optional(s, "kernel_cache_bytes", "solver", o.kernel_cache_bytes);
    o.validate();
  }

  if (doc.contains("postprocess")) {
    const json& p = doc["postprocess"];
    PostprocessOptions& o = cfg.postprocess;
    o.repair_threshold = optional(p, "repair_threshold", "postprocess", o.repair_threshold);
    o.fourier_order = optional(p, "fourier_order", "postprocess", o.fourier_order);
    o.fourier_period = optional(p, "fourier_period", "postprocess", o.fourier_period);
    o.stroke_gap = optional(p, "stroke_gap", "postprocess", o.stroke_gap);
    o.stroke_fourier_order = optional(p, "stroke_fourier_order", "postprocess", o.stroke_fourier_order);
    if (!(o.repair_threshold >= 0.0)) throw ValidationError("must be >= 0", "postprocess.repair_threshold");
    if (!(o.fourier_period > 0.0)) throw ValidationError("must be > 0", "postprocess.fourier_period");
    if (!(o.stroke_gap > 0.0)) throw ValidationError("must be > 0", "postprocess.stroke_gap");
  }

  cfg.retarded = RetardedSolveParams::for_horizon(cfg.time.terminal());
  if (doc.contains("retarded")) {
    const json& r = doc["retarded"];
    cfg.retarded.tolerance = optional(r, "tolerance", "retarded", cfg.retarded.tolerance);
    cfg.retarded.max_iterations = optional(r, "max_iterations", "retarded", cfg.retarded.max_iterations);
    if (!(cfg.retarded.tolerance > 0.0)) throw ValidationError("must be > 0", "retarded.tolerance");
    if (cfg.retarded.max_iterations < 1) throw ValidationError("must be >= 1", "retarded.max_iterations");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open configuration file '" + path.string() + "'", "config");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("parse error: ") + e.what(), "config");
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["physics"] = {{"c", cfg.wave_speed}};
  j["signal"] = to_json(cfg.signal);
  j["sensors"] = to_json(cfg.sensors);
  j["time"] = {{"T", cfg.time.terminal()}, {"N_T", cfg.time.steps()}};
  if (cfg.static_sources) {
    json pts = json::array();
    for (const PointSource& s : cfg.static_sources->sources())
      pts.push_back({{"location", vec3_json(s.location)}, {"intensity", s.intensity}});
    j["sources"] = {{"kind", "static"}, {"points", pts}};
  } else if (cfg.trajectory) {
    j["sources"] = {{"kind", "trajectory"}, {"path", to_json(*cfg.trajectory)}};
  }
  const GridIndex& r = cfg.grid.resolution();
  j["grid"] = {{"lower", vec3_json(cfg.grid.lower())},
               {"upper", vec3_json(cfg.grid.upper())},
               {"resolution", {r[0], r[1], r[2]}}};
  j["noise"] = {{"level", cfg.noise.level}, {"seed", cfg.noise.seed}};
  const SolverOptions& s = cfg.solver;
  j["solver"] = {{"max_iterations", s.max_iterations},
                 {"tolerance", s.tolerance},
                 {"tikhonov", s.tikhonov},
                 {"intensity_threshold", s.intensity_threshold},
                 {"isosurface_fraction", s.isosurface_fraction},
                 {"max_peaks", s.max_peaks},
                 {"kernel_cache_bytes", s.kernel_cache_bytes}};
  const PostprocessOptions& p = cfg.postprocess;
  j["postprocess"] = {{"repair_threshold", p.repair_threshold},
                      {"fourier_order", p.fourier_order},
                      {"fourier_period", p.fourier_period},
                      {"stroke_gap", p.stroke_gap},
                      {"stroke_fourier_order", p.stroke_fourier_order}};
  j["retarded"] = {{"tolerance", cfg.retarded.tolerance}, {"max_iterations", cfg.retarded.max_iterations}};
  return j;
}

void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'", "config");
  out << to_json(cfg).dump(2) << '\n';
}

}  // namespace wavesrc
