#include "wavesrc/invmoving.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "wavesrc/error.hpp"
#include "wavesrc/forward.hpp"
#include "wavesrc/parallel.hpp"
#include "wavesrc/simd.hpp"

namespace wavesrc {

namespace {

double indicator_from_misfit(double ssd, bool* exact) {
  if (ssd < kIndicatorFloor) {
    if (exact) *exact = true;
    return kIndicatorCap;
  }
  if (exact) *exact = false;
  return 1.0 / std::sqrt(ssd);
}

/// Kernel values of every sensor at one time for precomputed distances.
void kernel_at(double t, std::span<const double> dist, const Signal& sig, double c, std::span<double> out) {
  for (std::size_t i = 0; i < dist.size(); ++i) out[i] = kernel_value(t, dist[i], sig, c);
}

}  // namespace

IndicatorValue indicator(const Vec3& z, std::size_t col, const MeasurementSet& data, const Signal& sig) {
  const std::size_t nx = data.sensors.size();
  if (col >= data.timegrid.steps()) throw ValidationError("time index out of range");
  std::vector<double> dist(nx);
  std::vector<double> kern(nx);
  std::vector<double> meas(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    dist[i] = distance(data.sensors[i], z);
    if (dist[i] == 0.0) throw ValidationError("indicator evaluated at sensor " + std::to_string(i));
    meas[i] = data.samples(i, col);
  }
  kernel_at(data.timegrid.sample(col), dist, sig, data.wave_speed, kern);
  IndicatorValue out{};
  out.value = indicator_from_misfit(simd::sum_sq_diff(kern, meas), &out.exact_match);
  return out;
}

TrajectoryEstimate locate_per_step(const MeasurementSet& data, const SamplingGrid& grid, const Signal& sig,
                                   int threads) {
  data.validate();
  const std::size_t nx = data.sensors.size();
  const std::size_t nt = data.timegrid.steps();
  const std::vector<double> times = data.timegrid.samples();

  // Time-major copy so each step's measurements are contiguous.
  std::vector<double> by_time(nt * nx);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t k = 0; k < nt; ++k) by_time[k * nx + i] = data.samples(i, k);

  struct Best {
    double value = -1.0;
    std::size_t index = 0;
  };
  std::vector<Best> best(nt);
  std::mutex merge;

  parallel_for(grid.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<Best> local(nt);
    std::vector<double> dist(nx);
    std::vector<double> kern(nx);
    for (std::size_t l = begin; l < end; ++l) {
      const Vec3 z = grid.point(l);
      for (std::size_t i = 0; i < nx; ++i) {
        dist[i] = distance(data.sensors[i], z);
        if (dist[i] == 0.0) throw ValidationError("grid point " + std::to_string(l) + " coincides with sensor " +
                                                  std::to_string(i), "grid");
      }
      for (std::size_t k = 0; k < nt; ++k) {
        kernel_at(times[k], dist, sig, data.wave_speed, kern);
        const double v =
            indicator_from_misfit(simd::sum_sq_diff(kern, std::span<const double>(by_time).subspan(k * nx, nx)),
                                  nullptr);
        if (v > local[k].value) local[k] = {v, l};
      }
    }
    const std::lock_guard lock(merge);
    for (std::size_t k = 0; k < nt; ++k) {
      const Best& b = local[k];
      if (b.value > best[k].value || (b.value == best[k].value && b.index < best[k].index)) best[k] = b;
    }
  });

  TrajectoryEstimate est;
  est.times = times;
  est.repaired.assign(nt, false);
  for (const Best& b : best) {
    est.locations.push_back(grid.point(b.index));
    est.peak_values.push_back(b.value);
  }
  return est;
}

TrajectoryEstimate repair_trajectory(const TrajectoryEstimate& est, const Signal& sig, double threshold) {
  const std::size_t n = est.size();
  if (n < 3) throw ValidationError("repair needs at least 3 time steps");
  std::vector<std::size_t> valid;
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(sig(est.times[k])) >= threshold) valid.push_back(k);
  if (valid.size() < 2) throw ValidationError("repair needs at least 2 steps with a usable signal");

  TrajectoryEstimate out = est;
  auto line = [&](std::size_t a, std::size_t b, std::size_t k) {
    // Point on the line through samples a and b, at index position k.
    const double w = (static_cast<double>(k) - static_cast<double>(a)) /
                     (static_cast<double>(b) - static_cast<double>(a));
    return est.locations[a] + w * (est.locations[b] - est.locations[a]);
  };

  std::size_t next = 0;  // position in `valid` of the first valid step > k
  for (std::size_t k = 0; k < n; ++k) {
    while (next < valid.size() && valid[next] <= k) ++next;
    if (next > 0 && valid[next - 1] == k) continue;
    if (next == 0) {
      out.locations[k] = line(valid[0], valid[1], k);
    } else if (next == valid.size()) {
      out.locations[k] = line(valid[next - 2], valid[next - 1], k);
    } else {
      out.locations[k] = line(valid[next - 1], valid[next], k);
    }
    out.repaired[k] = true;
  }
  return out;
}

// ---------------------------------------------------------------------------

Vec3 FourierModel::operator()(double t) const {
  Vec3 s = a0;
  for (std::size_t n = 1; n <= order; ++n) {
    const double w = 2.0 * kPi * static_cast<double>(n) / period;
    const double phase = w * (t - origin);
    s += std::cos(phase) * a[n - 1] + std::sin(phase) * b[n - 1];
  }
  return s;
}

FourierModel fourier_smooth(std::span<const double> times, std::span<const Vec3> points, std::size_t order,
                            double period) {
  const std::size_t nt = times.size();
  if (points.size() != nt) throw ValidationError("times and points differ in length");
  if (nt < 2 * order + 1)
    throw ValidationError("need at least 2N+1 = " + std::to_string(2 * order + 1) + " samples for order " +
                          std::to_string(order));
  if (!(period > 0.0)) throw ValidationError("period must be > 0", "postprocess.fourier_period");

  FourierModel m;
  m.order = order;
  m.period = period;
  m.a.assign(order, Vec3{});
  m.b.assign(order, Vec3{});
  const double inv = 1.0 / static_cast<double>(nt);
  for (std::size_t k = 0; k < nt; ++k) m.a0 += points[k];
  m.a0 *= inv;
  for (std::size_t n = 1; n <= order; ++n) {
    const double w = 2.0 * kPi * static_cast<double>(n) / period;
    Vec3 an;
    Vec3 bn;
    for (std::size_t k = 0; k < nt; ++k) {
      an += std::cos(w * times[k]) * points[k];
      bn += std::sin(w * times[k]) * points[k];
    }
    m.a[n - 1] = 2.0 * inv * an;
    m.b[n - 1] = 2.0 * inv * bn;
  }
  return m;
}

FourierModel fourier_smooth(const TrajectoryEstimate& est, std::size_t order, double period) {
  return fourier_smooth(est.times, est.locations, order, period);
}

FourierModel fourier_smooth_open(std::span<const double> times, std::span<const Vec3> points, std::size_t order) {
  const std::size_t len = times.size();
  if (points.size() != len) throw ValidationError("times and points differ in length");
  if (len < 2) throw ValidationError("need at least 2 samples");
  const double h = (times.back() - times.front()) / static_cast<double>(len - 1);

  // Even extension about both ends; samples sit at (j + 1/2) h from the origin.
  std::vector<double> rel(2 * len);
  std::vector<Vec3> ext(2 * len);
  for (std::size_t j = 0; j < 2 * len; ++j) {
    rel[j] = (static_cast<double>(j) + 0.5) * h;
    ext[j] = j < len ? points[j] : points[2 * len - 1 - j];
  }
  FourierModel m = fourier_smooth(rel, ext, order, 2.0 * static_cast<double>(len) * h);
  m.origin = times.front() - 0.5 * h;
  return m;
}

// ---------------------------------------------------------------------------

SegmentedTrajectory segment_strokes(const TrajectoryEstimate& est, double gap, std::size_t order) {
  const std::size_t n = est.size();
  std::vector<bool> is_break(n, false);
  SegmentedTrajectory out;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double back = distance(est.locations[k - 1], est.locations[k]);
    const double fwd = distance(est.locations[k + 1], est.locations[k]);
    if (std::max(back, fwd) > gap) {
      is_break[k] = true;
      out.break_points.push_back(k);
    }
  }

  std::size_t k = 0;
  while (k < n) {
    if (is_break[k]) {
      ++k;
      continue;
    }
    Segment seg{k, k, std::nullopt};
    while (seg.end < n && !is_break[seg.end]) ++seg.end;
    if (seg.size() >= 2 * order + 1) {
      seg.model = fourier_smooth_open(std::span<const double>(est.times).subspan(seg.begin, seg.size()),
                                      std::span<const Vec3>(est.locations).subspan(seg.begin, seg.size()), order);
    }
    k = seg.end;
    out.segments.push_back(std::move(seg));
  }
  return out;
}

}  // namespace wavesrc
