#pragma once

// Experiment configuration: a JSON document describing the physics, the
// acquisition, the source, the sampling grid and the solver/post-processing
// knobs. See README.md for the schema.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "wavesrc/core.hpp"
#include "wavesrc/forward.hpp"
#include "wavesrc/invstatic.hpp"

namespace wavesrc {

struct SensorSpec {
  enum class Kind { Sphere, Points };
  Kind kind = Kind::Sphere;
  double radius = 5.0;
  std::size_t n_phi = 8;
  std::size_t n_theta = 8;
  std::vector<std::size_t> phi_indices;
  std::vector<std::size_t> theta_indices;
  std::vector<Vec3> points;

  SensorArray build() const;

  friend bool operator==(const SensorSpec&, const SensorSpec&) = default;
};

struct NoiseSpec {
  double level = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

struct PostprocessOptions {
  double repair_threshold = 1e-4;
  std::size_t fourier_order = 5;
  double fourier_period = 2.0 * kPi;
  double stroke_gap = 0.3;
  std::size_t stroke_fourier_order = 3;

  friend bool operator==(const PostprocessOptions&, const PostprocessOptions&) = default;
};

struct ExperimentConfig {
  double wave_speed = 1.0;
  Signal signal;
  SensorSpec sensors;
  TimeGrid time{15.0, 64};
  // At most one of these is set; neither for inversion of external data.
  std::optional<StaticSourceSet> static_sources;
  std::optional<Trajectory> trajectory;
  SamplingGrid grid{{-2.0, -2.0, -2.0}, {2.0, 2.0, 2.0}, {21, 21, 21}};
  NoiseSpec noise;
  SolverOptions solver;
  PostprocessOptions postprocess;
  RetardedSolveParams retarded = RetardedSolveParams::for_horizon(15.0);

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&);
};

bool operator==(const RetardedSolveParams& a, const RetardedSolveParams& b);

/// Parses and validates. Errors are ValidationError with the field path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& cfg);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

nlohmann::json to_json(const Signal& sig);
Signal signal_from_json(const nlohmann::json& j, const std::string& path = "signal");

}  // namespace wavesrc
