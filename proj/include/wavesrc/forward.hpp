#pragma once

// Exact boundary data for point sources in a homogeneous medium.

#include <optional>

#include "wavesrc/core.hpp"

namespace wavesrc {

/// lambda(t - dist / c) / (4 pi dist). The single place the time-convolved
/// Green kernel is evaluated; callers pass a precomputed distance.
inline double kernel_value(double t, double dist, const Signal& sig, double c) {
  return sig(t - dist / c) / (4.0 * kPi * dist);
}

/// (G * lambda)(x, t; z). Throws ValidationError when x == z.
double green_conv(const Vec3& x, double t, const Vec3& z, const Signal& sig, double c);

/// samples(i, k) = sum_j a_j (G * lambda)(x_i, t_k; s_j).
MeasurementSet synthesize_static(const StaticSourceSet& sources, const SensorArray& sensors,
                                 const TimeGrid& timegrid, const Signal& sig, double c, int threads = 1);

struct RetardedSolveParams {
  double tolerance = 1e-12;
  int max_iterations = 200;

  /// Tolerance 1e-12 * max(1, T).
  static RetardedSolveParams for_horizon(double terminal);
};

/// Emission time tau in [0, t] solving t - tau = |x - s(tau)| / c.
///
/// Fixed-point iteration tau <- t - |x - s(tau)| / c from tau = t (a
/// contraction with factor |v|/c), falling back to bisection on [0, t].
/// Returns nullopt when even tau = 0 is too late, i.e. the wave emitted at
/// the start has not reached x yet; the caller treats that as zero field.
/// Throws ValidationError if |v(tau)| >= c, NumericalError on non-convergence.
std::optional<double> retarded_time(const Vec3& x, double t, const Trajectory& traj, double c,
                                    const RetardedSolveParams& params);

/// max |v(t_k)| over k = 0..N_T.
double max_speed(const Trajectory& traj, const TimeGrid& timegrid);

/// Moving unit-intensity source:
///   u(x, t) = lambda(tau) / (4 pi R (1 - v(tau) . R_hat / c)),  R = x - s(tau).
/// Throws ValidationError ("superluminal") if the sampled speed reaches c.
MeasurementSet synthesize_moving(const Trajectory& traj, const SensorArray& sensors, const TimeGrid& timegrid,
                                 const Signal& sig, double c, const RetardedSolveParams& params,
                                 int threads = 1);

}  // namespace wavesrc
