#pragma once

// Moving-source reconstruction by a per-time-step grid scan of the indicator
//   I(z, t_k) = ( sum_i ((G * lambda)(x_i, t_k; z) - u(x_i, t_k))^2 )^(-1/2)
// followed by trajectory repair, Fourier smoothing and stroke segmentation.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wavesrc/core.hpp"

namespace wavesrc {

/// The squared misfit is floored so the indicator stays finite at an exact
/// match.
inline constexpr double kIndicatorFloor = 1e-24;
inline constexpr double kIndicatorCap = 1e12;

struct IndicatorValue {
  double value;
  bool exact_match;
};

/// Indicator at candidate z for sample column `col` (time t_{col+1}).
/// Throws ValidationError if z coincides with a sensor.
IndicatorValue indicator(const Vec3& z, std::size_t col, const MeasurementSet& data, const Signal& sig);

struct TrajectoryEstimate {
  std::vector<double> times;
  std::vector<Vec3> locations;
  std::vector<double> peak_values;
  std::vector<bool> repaired;

  std::size_t size() const { return times.size(); }
};

/// For every time step, the grid point maximising the indicator (ties to the
/// lowest linear index). Exhaustive scan, parallel over grid points.
/// Sensors may lie inside the grid box but not on a grid point.
TrajectoryEstimate locate_per_step(const MeasurementSet& data, const SamplingGrid& grid, const Signal& sig,
                                   int threads = 1);

/// Replaces estimates at steps where |lambda(t_k)| < threshold: isolated
/// interior steps by the neighbour midpoint, interior runs by linear
/// interpolation between the nearest valid steps, leading/trailing runs by
/// linear extrapolation from the two nearest valid steps. Needs >= 3 steps
/// and >= 2 valid ones.
TrajectoryEstimate repair_trajectory(const TrajectoryEstimate& est, const Signal& sig, double threshold = 1e-4);

/// s(t) = a0 + sum_{n=1..N} a_n cos(w_n (t - origin)) + b_n sin(w_n (t - origin)),
/// w_n = 2 pi n / period.
struct FourierModel {
  std::size_t order = 0;
  Vec3 a0;
  std::vector<Vec3> a;
  std::vector<Vec3> b;
  double period = 2.0 * kPi;
  double origin = 0.0;

  Vec3 operator()(double t) const;
};

/// Discrete Fourier projection of samples taken uniformly over one period:
///   a0 = mean(s), a_n = 2/N_T sum s_k cos(w_n t_k), b_n = 2/N_T sum s_k sin(w_n t_k).
/// Requires N_T >= 2 N + 1.
FourierModel fourier_smooth(std::span<const double> times, std::span<const Vec3> points, std::size_t order,
                            double period = 2.0 * kPi);
FourierModel fourier_smooth(const TrajectoryEstimate& est, std::size_t order, double period = 2.0 * kPi);

/// Fourier fit of an open (non-periodic) run of uniformly spaced samples:
/// the run is mirrored about its ends before projecting, so the model is a
/// cosine series without the wrap-around jump between first and last sample.
FourierModel fourier_smooth_open(std::span<const double> times, std::span<const Vec3> points, std::size_t order);

struct Segment {
  std::size_t begin;  // first step index
  std::size_t end;    // one past the last
  std::optional<FourierModel> model;

  std::size_t size() const { return end - begin; }
};

struct SegmentedTrajectory {
  std::vector<Segment> segments;
  std::vector<std::size_t> break_points;
};

/// Step k (interior only) is a break point when its distance to either
/// neighbour exceeds `gap`. Maximal runs of non-break steps become segments;
/// those with >= 2 order + 1 samples get an open Fourier model.
SegmentedTrajectory segment_strokes(const TrajectoryEstimate& est, double gap = 0.3, std::size_t order = 3);

}  // namespace wavesrc
