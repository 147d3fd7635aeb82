#pragma once

// The four pipeline verbs behind the `wavesrc` tool. Each writes its outputs
// plus a manifest.json (config echo, generator, timings, checksums) into an
// output directory and returns the manifest.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wavesrc/config.hpp"
#include "wavesrc/io.hpp"

namespace wavesrc {

struct RunOptions {
  int threads = 1;
  std::optional<std::uint64_t> seed;  // overrides noise.seed
};

RunManifest cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out, const RunOptions& opts = {});

RunManifest cmd_invert_static(const ExperimentConfig& cfg, const std::filesystem::path& data,
                              const std::filesystem::path& out, const RunOptions& opts = {});

RunManifest cmd_invert_moving(const ExperimentConfig& cfg, const std::filesystem::path& data,
                              const std::filesystem::path& out, const RunOptions& opts = {});

/// Long-format CSVs for plotting, derived from an inversion output directory.
RunManifest cmd_plotdata(const ExperimentConfig& cfg, const std::filesystem::path& run_dir,
                         const std::filesystem::path& out);

/// Warnings when the data is outside the regime where the per-step indicator
/// is expected to be accurate (fast source, or sensors many wavelengths apart
/// relative to the propagation delay).
std::vector<std::string> moving_regime_warnings(const ExperimentConfig& cfg, const SensorArray& sensors);

/// Numeric CSV with a header row, column name -> values.
using Table = std::map<std::string, std::vector<double>>;
Table read_table(const std::filesystem::path& path);

}  // namespace wavesrc
