#include "wavesrc/forward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavesrc/error.hpp"
#include "wavesrc/parallel.hpp"

namespace wavesrc {

namespace {

void require_speed(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("c must be > 0", "physics.c");
}

}  // namespace

double green_conv(const Vec3& x, double t, const Vec3& z, const Signal& sig, double c) {
  require_speed(c);
  const double d = distance(x, z);
  if (d == 0.0) throw ValidationError("kernel evaluated at its singular point (x == z)");
  return kernel_value(t, d, sig, c);
}

MeasurementSet synthesize_static(const StaticSourceSet& sources, const SensorArray& sensors,
                                 const TimeGrid& timegrid, const Signal& sig, double c, int threads) {
  require_speed(c);
  const std::size_t nx = sensors.size();
  const std::size_t nt = timegrid.steps();
  const std::size_t m = sources.size();

  std::vector<double> dist(nx * m);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      dist[i * m + j] = distance(sensors[i], sources[j].location);
      if (dist[i * m + j] == 0.0)
        throw ValidationError("sensor " + std::to_string(i) + " coincides with source " + std::to_string(j));
    }

  Matrix samples(nx, nt);
  parallel_for(nx, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t col = 0; col < nt; ++col) {
        const double t = timegrid.sample(col);
        double u = 0.0;
        for (std::size_t j = 0; j < m; ++j) u += sources[j].intensity * kernel_value(t, dist[i * m + j], sig, c);
        samples(i, col) = u;
      }
  });
  return MeasurementSet{sensors, timegrid, c, std::move(samples), std::nullopt, Provenance::Static};
}

RetardedSolveParams RetardedSolveParams::for_horizon(double terminal) {
  return {1e-12 * std::max(1.0, terminal), 200};
}

std::optional<double> retarded_time(const Vec3& x, double t, const Trajectory& traj, double c,
                                    const RetardedSolveParams& params) {
  require_speed(c);
  if (!(params.tolerance > 0.0) || params.max_iterations < 1)
    throw ValidationError("tolerance must be > 0 and max_iterations >= 1", "retarded");

  // g is strictly decreasing for |v| < c, with g(t) <= 0.
  auto g = [&](double tau) { return t - tau - distance(x, traj.position(tau)) / c; };
  auto check_speed = [&](double tau) {
    if (norm(traj.velocity(tau)) >= c)
      throw ValidationError("superluminal trajectory: |v| >= c at t = " + std::to_string(tau), "sources.trajectory");
  };

  const double g0 = g(0.0);
  if (g0 < 0.0) return std::nullopt;
  if (g0 <= params.tolerance && t <= params.tolerance) return 0.0;

  double tau = t;
  for (int it = 0; it < params.max_iterations; ++it) {
    tau = std::clamp(t - distance(x, traj.position(tau)) / c, 0.0, t);
    if (std::abs(g(tau)) <= params.tolerance) {
      check_speed(tau);
      return tau;
    }
  }

  double lo = 0.0;
  double hi = t;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (std::abs(gm) <= params.tolerance) {
      check_speed(mid);
      return mid;
    }
    (gm > 0.0 ? lo : hi) = mid;
    if (hi - lo <= 0.0) break;
  }
  throw NumericalError("retarded-time solve did not converge");
}

double max_speed(const Trajectory& traj, const TimeGrid& timegrid) {
  double vmax = 0.0;
  for (std::size_t k = 0; k <= timegrid.steps(); ++k) vmax = std::max(vmax, norm(traj.velocity(timegrid.at(k))));
  return vmax;
}

MeasurementSet synthesize_moving(const Trajectory& traj, const SensorArray& sensors, const TimeGrid& timegrid,
                                 const Signal& sig, double c, const RetardedSolveParams& params, int threads) {
  require_speed(c);
  const double vmax = max_speed(traj, timegrid);
  if (vmax >= c)
    throw ValidationError("superluminal trajectory: sampled max |v| = " + std::to_string(vmax) +
                              " >= c = " + std::to_string(c),
                          "sources.trajectory");

  const std::size_t nx = sensors.size();
  const std::size_t nt = timegrid.steps();
  Matrix samples(nx, nt);
  parallel_for(nx, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3& x = sensors[i];
      for (std::size_t col = 0; col < nt; ++col) {
        const double t = timegrid.sample(col);
        const auto tau = retarded_time(x, t, traj, c, params);
        if (!tau) {
          samples(i, col) = 0.0;
          continue;
        }
        const Vec3 r = x - traj.position(*tau);
        const double dist = norm(r);
        if (dist == 0.0) throw ValidationError("sensor " + std::to_string(i) + " lies on the trajectory");
        const double doppler = 1.0 - dot(traj.velocity(*tau), r) / (c * dist);
        if (!(doppler > 0.0)) throw NumericalError("non-positive Doppler factor");
        // With v = 0 this is exactly kernel_value(t, dist, sig, c).
        samples(i, col) = sig(*tau) / (4.0 * kPi * dist * doppler);
      }
    }
  });
  return MeasurementSet{sensors, timegrid, c, std::move(samples), std::nullopt, Provenance::Moving};
}

}  // namespace wavesrc
