#pragma once

// On-disk formats.
//
// Measurements are a JSON descriptor (geometry, time grid, wave speed, noise
// metadata, provenance) next to a headerless CSV matrix: one row per sensor
// in declared order, one column per time step k = 1..N_T, values printed
// with 17 significant digits so they read back bit for bit.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavesrc/core.hpp"

namespace wavesrc {

inline constexpr const char* kMeasurementFormat = "wavesrc-measurements/1";

/// Writes `<stem>.json` and `<stem>.csv` into `dir`; returns the JSON path.
/// The signal, when given, is recorded for reference only.
std::filesystem::path write_measurements(const MeasurementSet& data, const std::filesystem::path& dir,
                                         const std::string& stem = "measurements",
                                         const std::optional<Signal>& signal = std::nullopt);

/// Reads a descriptor written by write_measurements (the CSV path inside it
/// is resolved relative to the descriptor).
MeasurementSet read_measurements(const std::filesystem::path& descriptor);

/// Full-precision decimal rendering used in every numeric output.
std::string format_double(double v);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct OutputRecord {
  std::string path;  // relative to the manifest's directory
  std::string sha256;

  friend bool operator==(const OutputRecord&, const OutputRecord&) = default;
};

struct RunManifest {
  std::string command;
  std::string tool_version;
  nlohmann::json config;
  std::string generator;
  std::uint64_t seed = 0;
  std::string isa;
  int threads = 1;
  std::map<std::string, double> timings;
  std::vector<std::string> warnings;
  std::vector<OutputRecord> outputs;

  /// Hashes `file` (relative to `dir`) and appends it.
  void record_output(const std::filesystem::path& dir, const std::string& file);

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const RunManifest& m, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

/// Every declared output exists and matches its checksum.
bool verify_outputs(const RunManifest& m, const std::filesystem::path& dir);

}  // namespace wavesrc
