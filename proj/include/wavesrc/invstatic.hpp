#pragma once

// Stationary-source reconstruction: fit grid coefficients c(z_l) so that
//   sum_l c(z_l) (G * lambda)(x_i, t_k; z_l) ~= u(x_i, t_k)
// in the least-squares sense, then read sources off the coefficient field.

#include <cstddef>
#include <span>
#include <vector>

#include "wavesrc/core.hpp"

namespace wavesrc {

/// What the boundary data was recorded with.
struct AcquisitionGeometry {
  SensorArray sensors;
  TimeGrid timegrid;
  Signal signal;
  double wave_speed;
};

struct SolverOptions {
  std::size_t max_iterations = 2000;
  double tolerance = 1e-6;
  double tikhonov = 0.0;
  double intensity_threshold = 1.0;
  double isosurface_fraction = 0.7;
  std::size_t max_peaks = 64;
  /// The kernel matrix is cached when it fits; otherwise entries are
  /// recomputed on every application.
  std::size_t kernel_cache_bytes = std::size_t{1} << 30;
  int threads = 1;

  void validate() const;

  friend bool operator==(const SolverOptions&, const SolverOptions&) = default;
};

/// The N_x N_T by N_z system matrix A, rows ordered (sensor, time) like the
/// measurement matrix, column l the kernel of grid point z_l.
///
/// Cached and matrix-free modes produce bitwise-identical results, and
/// neither depends on the thread count.
class KernelOperator {
 public:
  /// Throws ValidationError if a sensor is inside the grid box.
  KernelOperator(AcquisitionGeometry geometry, SamplingGrid grid, std::size_t cache_budget_bytes = 0,
                 int threads = 1);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return grid_.size(); }
  bool cached() const { return !cache_.empty(); }
  const SamplingGrid& grid() const { return grid_; }
  const AcquisitionGeometry& geometry() const { return geometry_; }

  /// out = A coeffs
  void apply(std::span<const double> coeffs, std::span<double> out) const;
  /// out = A^T residual
  void apply_adjoint(std::span<const double> residual, std::span<double> out) const;

  /// Rows [sensor_begin * N_T, sensor_end * N_T) of column l.
  void column(std::size_t l, std::size_t sensor_begin, std::size_t sensor_end, std::span<double> out) const;

 private:
  AcquisitionGeometry geometry_;
  SamplingGrid grid_;
  int threads_;
  std::size_t rows_;
  std::vector<double> times_;
  std::vector<double> cache_;  // column-major
};

std::vector<double> forward_apply(std::span<const double> coeffs, const SamplingGrid& grid,
                                  const AcquisitionGeometry& geometry);
std::vector<double> adjoint_apply(std::span<const double> residual, const SamplingGrid& grid,
                                  const AcquisitionGeometry& geometry);

struct SolverReport {
  std::size_t iterations = 0;
  /// |A^T(u - Ac) - alpha c| / |A^T u| at exit.
  double relative_normal_residual = 0.0;
  bool converged = false;
  bool zero_data = false;
  bool kernel_cached = false;
  /// Per-iteration |A^T r - alpha c| / |A^T u|, starting with 1 at c = 0.
  std::vector<double> normal_residual_trace;
  /// Per-iteration sqrt(|u - Ac|^2 + alpha |c|^2), starting with |u|.
  std::vector<double> residual_trace;
};

struct CoefficientField {
  SamplingGrid grid;
  std::vector<double> values;
  SolverReport report;
};

/// Conjugate gradient on (A^T A + alpha I) c = A^T u from c = 0.
CoefficientField cgnr_solve(const MeasurementSet& data, const SamplingGrid& grid, const Signal& sig,
                            const SolverOptions& opts);
/// Same, against a prebuilt operator (lets callers reuse a cached kernel).
CoefficientField cgnr_solve(const KernelOperator& op, std::span<const double> rhs, const SolverOptions& opts);

struct Peak {
  GridIndex cell;
  std::size_t index;
  Vec3 location;
  double intensity;
};

enum class PeakTermination { Threshold, MaxCount };

struct PeakReport {
  std::vector<Peak> peaks;
  PeakTermination termination = PeakTermination::Threshold;
  /// Cells with c >= isosurface_fraction * max c, ascending.
  std::vector<std::size_t> isosurface_cells;
};

/// Greedy peak picking: take the global maximum of a working copy, sum the
/// (grid-clipped) 3x3x3 block around it as the intensity, stop when that sum
/// drops below the threshold, otherwise record it and zero the block.
/// Ties go to the lowest linear index.
PeakReport extract_peaks(const CoefficientField& field, const SolverOptions& opts);

/// Cells strictly greater than every neighbour in their 26-neighbourhood.
std::vector<std::size_t> local_maxima(const CoefficientField& field);

}  // namespace wavesrc
