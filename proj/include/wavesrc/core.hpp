#pragma once

// Domain types shared by the forward model and both inversion pipelines.
// Everything here is immutable after construction; constructors validate.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wavesrc/vec3.hpp"

namespace wavesrc {

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Signal
// ---------------------------------------------------------------------------

/// sin(omega t) exp(-decay (t - center)^2) for t >= 0.
struct GaussianModulatedSine {
  double omega = 10.0;
  double center = 3.0;
  double decay = 0.3;

  friend bool operator==(const GaussianModulatedSine&, const GaussianModulatedSine&) = default;
};

/// Linearly interpolated samples; zero outside [times.front(), times.back()].
struct TabulatedSignal {
  std::vector<double> times;
  std::vector<double> values;

  friend bool operator==(const TabulatedSignal&, const TabulatedSignal&) = default;
};

/// A causal source waveform: eval(t) == 0 for every t < 0.
class Signal {
 public:
  using Kind = std::variant<GaussianModulatedSine, TabulatedSignal>;

  /// The pulse used throughout the experiments: sin(10t) exp(-0.3 (t-3)^2).
  Signal() : kind_(GaussianModulatedSine{}) {}
  explicit Signal(GaussianModulatedSine pulse);
  /// Times must be strictly increasing and values finite. A table that does
  /// not vanish at t = 0 is rejected: the causal extension would jump there.
  explicit Signal(TabulatedSignal table);

  double operator()(double t) const;

  const Kind& kind() const { return kind_; }

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  Kind kind_;
};

inline double eval_signal(const Signal& sig, double t) { return sig(t); }

// ---------------------------------------------------------------------------
// Time grid
// ---------------------------------------------------------------------------

/// t_k = k T / N_T. Samples are taken at k = 1..N_T; t_0 = 0 carries no
/// information because the field is causal.
class TimeGrid {
 public:
  TimeGrid(double terminal, std::size_t steps);

  double terminal() const { return terminal_; }
  std::size_t steps() const { return steps_; }

  /// t_k for k in [0, steps()].
  double at(std::size_t k) const { return static_cast<double>(k) * terminal_ / static_cast<double>(steps_); }
  /// Time of sample column `col` (0-based), i.e. t_{col+1}.
  double sample(std::size_t col) const { return at(col + 1); }
  std::vector<double> samples() const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double terminal_;
  std::size_t steps_;
};

// ---------------------------------------------------------------------------
// Sensors
// ---------------------------------------------------------------------------

class SensorArray {
 public:
  /// At least one point; points pairwise distinct.
  explicit SensorArray(std::vector<Vec3> points);

  std::size_t size() const { return points_.size(); }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Vec3> points() const { return points_; }

  friend bool operator==(const SensorArray&, const SensorArray&) = default;

 private:
  std::vector<Vec3> points_;
};

/// x(i,j) = r (sin phi_i cos theta_j, sin phi_i sin theta_j, cos phi_i),
/// phi_i = (2i-1) pi / (2 n_phi), i = 1..n_phi, theta_j = 2 pi j / n_theta,
/// j = 0..n_theta-1. Ordered phi-major: index = (i-1) * n_theta + j.
SensorArray sphere_sensors(double radius, std::size_t n_phi, std::size_t n_theta);

/// Subset of a sphere layout. `phi_indices` are 1-based, `theta_indices`
/// 0-based, matching the formula above; empty means "all".
SensorArray sphere_sensors(double radius, std::size_t n_phi, std::size_t n_theta,
                           std::span<const std::size_t> phi_indices,
                           std::span<const std::size_t> theta_indices);

// ---------------------------------------------------------------------------
// Sampling grid
// ---------------------------------------------------------------------------

using GridIndex = std::array<std::size_t, 3>;

/// Uniform lattice of n1 x n2 x n3 points spanning [lower, upper].
/// Linear index l = (i * n2 + j) * n3 + k, axis 3 fastest.
class SamplingGrid {
 public:
  SamplingGrid(Vec3 lower, Vec3 upper, GridIndex resolution);

  const Vec3& lower() const { return lower_; }
  const Vec3& upper() const { return upper_; }
  const GridIndex& resolution() const { return resolution_; }
  const Vec3& spacing() const { return spacing_; }
  std::size_t size() const { return resolution_[0] * resolution_[1] * resolution_[2]; }

  std::size_t index_of(const GridIndex& cell) const {
    return (cell[0] * resolution_[1] + cell[1]) * resolution_[2] + cell[2];
  }
  GridIndex cell_of(std::size_t l) const {
    const std::size_t k = l % resolution_[2];
    const std::size_t rest = l / resolution_[2];
    return {rest / resolution_[1], rest % resolution_[1], k};
  }
  Vec3 point(const GridIndex& cell) const;
  Vec3 point(std::size_t l) const { return point(cell_of(l)); }
  std::vector<Vec3> points() const;

  /// Inside the closed bounding box.
  bool contains(const Vec3& p) const;

  friend bool operator==(const SamplingGrid&, const SamplingGrid&) = default;

 private:
  Vec3 lower_;
  Vec3 upper_;
  GridIndex resolution_;
  Vec3 spacing_;
};

inline std::vector<Vec3> grid_points(const SamplingGrid& grid) { return grid.points(); }

/// Throws ValidationError if any sensor lies in the grid's closed box.
void require_sensors_outside(const SensorArray& sensors, const SamplingGrid& grid);

// ---------------------------------------------------------------------------
// Sources
// ---------------------------------------------------------------------------

struct PointSource {
  Vec3 location;
  double intensity = 1.0;

  friend bool operator==(const PointSource&, const PointSource&) = default;
};

class StaticSourceSet {
 public:
  /// M >= 1, distinct locations, positive intensities.
  explicit StaticSourceSet(std::vector<PointSource> sources);

  std::size_t size() const { return sources_.size(); }
  const PointSource& operator[](std::size_t j) const { return sources_[j]; }
  std::span<const PointSource> sources() const { return sources_; }

  friend bool operator==(const StaticSourceSet&, const StaticSourceSet&) = default;

 private:
  std::vector<PointSource> sources_;
};

// Trajectory kinds. The defaults reproduce the curves of the moving-source
// experiments.

struct StationaryPath {
  Vec3 position;
  friend bool operator==(const StationaryPath&, const StationaryPath&) = default;
};

/// (radius + amplitude cos(lobes t)) (cos t, sin t, 0).
struct CircleModulatedPath {
  double radius = 2.0;
  double amplitude = 0.3;
  double lobes = 3.0;
  friend bool operator==(const CircleModulatedPath&, const CircleModulatedPath&) = default;
};

/// radius (sin(omega t), cos(omega t), t/pi - 1).
struct HelixPath {
  double radius = 2.0;
  double omega = 2.0;
  friend bool operator==(const HelixPath&, const HelixPath&) = default;
};

/// radius (t/pi sin(omega t), t/pi cos(omega t), t/pi - 1).
struct ExpandingHelixPath {
  double radius = 2.0;
  double omega = 2.0;
  friend bool operator==(const ExpandingHelixPath&, const ExpandingHelixPath&) = default;
};

/// Linear interpolation between knots; clamped outside the knot range.
struct PiecewiseLinearPath {
  std::vector<double> times;
  std::vector<Vec3> points;
  friend bool operator==(const PiecewiseLinearPath&, const PiecewiseLinearPath&) = default;
};

class Trajectory {
 public:
  using Kind = std::variant<StationaryPath, CircleModulatedPath, HelixPath, ExpandingHelixPath,
                            PiecewiseLinearPath>;

  explicit Trajectory(Kind kind);

  Vec3 position(double t) const;
  /// Analytic derivative, or a central difference with step 1e-6 * (time
  /// span) for tabulated paths.
  Vec3 velocity(double t) const;

  const Kind& kind() const { return kind_; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  Kind kind_;
};

// ---------------------------------------------------------------------------
// Measurements
// ---------------------------------------------------------------------------

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Identity of the uniform draw stream used by add_noise: mt19937_64 with the
/// top 53 bits mapped to [-1, 1].
inline constexpr const char* kNoiseGeneratorId = "mt19937_64/u53";

struct NoiseInfo {
  double level = 0.0;
  std::uint64_t seed = 0;
  std::string generator = kNoiseGeneratorId;

  friend bool operator==(const NoiseInfo&, const NoiseInfo&) = default;
};

enum class Provenance { Static, Moving, External };

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

/// u(x_i, t_k): rows are sensors, columns time steps k = 1..N_T.
struct MeasurementSet {
  SensorArray sensors;
  TimeGrid timegrid;
  double wave_speed;
  Matrix samples;
  std::optional<NoiseInfo> noise;
  Provenance provenance = Provenance::External;

  /// Shape matches (N_x, N_T), c > 0, all samples finite.
  void validate() const;

  friend bool operator==(const MeasurementSet&, const MeasurementSet&) = default;
};

/// Multiplicative noise u -> (1 + level r) u, r ~ U[-1, 1] i.i.d., drawn in
/// row-major (sensor, then time) order from a generator seeded with `seed`.
MeasurementSet add_noise(const MeasurementSet& data, double level, std::uint64_t seed);

}  // namespace wavesrc
