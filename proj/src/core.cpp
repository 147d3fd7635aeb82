#include "wavesrc/core.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wavesrc/error.hpp"

namespace wavesrc {

namespace {

bool finite(const Vec3& p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

double interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
  if (x < xs.front() || x > xs.back()) return 0.0;
  const auto hi = std::upper_bound(xs.begin(), xs.end(), x);
  if (hi == xs.end()) return ys.back();
  const std::size_t j = static_cast<std::size_t>(hi - xs.begin());
  const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return ys[j - 1] + w * (ys[j] - ys[j - 1]);
}

}  // namespace

// ---------------------------------------------------------------------------

Signal::Signal(GaussianModulatedSine pulse) : kind_(pulse) {
  if (!std::isfinite(pulse.omega) || !std::isfinite(pulse.center) || !std::isfinite(pulse.decay))
    throw ValidationError("pulse parameters must be finite", "signal");
  if (pulse.decay < 0.0) throw ValidationError("decay must be >= 0", "signal.decay");
}

Signal::Signal(TabulatedSignal table) {
  if (table.times.size() < 2 || table.times.size() != table.values.size())
    throw ValidationError("need >= 2 samples and matching times/values", "signal");
  for (std::size_t i = 0; i < table.times.size(); ++i) {
    if (!std::isfinite(table.times[i]) || !std::isfinite(table.values[i]))
      throw ValidationError("non-finite sample", "signal");
    if (i > 0 && !(table.times[i] > table.times[i - 1]))
      throw ValidationError("times must be strictly increasing", "signal.times");
  }
  if (interpolate(table.times, table.values, 0.0) != 0.0)
    throw ValidationError("tabulated signal must vanish at t = 0", "signal.values");
  kind_ = std::move(table);
}

double Signal::operator()(double t) const {
  if (t < 0.0) return 0.0;
  if (const auto* p = std::get_if<GaussianModulatedSine>(&kind_)) {
    const double s = t - p->center;
    return std::sin(p->omega * t) * std::exp(-p->decay * s * s);
  }
  const auto& tab = std::get<TabulatedSignal>(kind_);
  return interpolate(tab.times, tab.values, t);
}

// ---------------------------------------------------------------------------

TimeGrid::TimeGrid(double terminal, std::size_t steps) : terminal_(terminal), steps_(steps) {
  if (!(terminal > 0.0) || !std::isfinite(terminal)) throw ValidationError("T must be > 0", "time.T");
  if (steps < 2) throw ValidationError("N_T must be >= 2", "time.N_T");
}

std::vector<double> TimeGrid::samples() const {
  std::vector<double> t(steps_);
  for (std::size_t c = 0; c < steps_; ++c) t[c] = sample(c);
  return t;
}

// ---------------------------------------------------------------------------

SensorArray::SensorArray(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("at least one sensor required", "sensors");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!finite(points_[i])) throw ValidationError("non-finite sensor coordinate", "sensors");
    for (std::size_t j = 0; j < i; ++j)
      if (points_[i] == points_[j]) throw ValidationError("duplicate sensor position", "sensors");
  }
}

SensorArray sphere_sensors(double radius, std::size_t n_phi, std::size_t n_theta) {
  return sphere_sensors(radius, n_phi, n_theta, {}, {});
}

SensorArray sphere_sensors(double radius, std::size_t n_phi, std::size_t n_theta,
                           std::span<const std::size_t> phi_indices,
                           std::span<const std::size_t> theta_indices) {
  if (!(radius > 0.0)) throw ValidationError("radius must be > 0", "sensors.radius");
  if (n_phi < 1 || n_theta < 1) throw ValidationError("n_phi and n_theta must be >= 1", "sensors");

  auto keep_phi = [&](std::size_t i) {
    return phi_indices.empty() || std::find(phi_indices.begin(), phi_indices.end(), i) != phi_indices.end();
  };
  auto keep_theta = [&](std::size_t j) {
    return theta_indices.empty() ||
           std::find(theta_indices.begin(), theta_indices.end(), j) != theta_indices.end();
  };
  for (std::size_t i : phi_indices)
    if (i < 1 || i > n_phi) throw ValidationError("phi index out of range", "sensors.phi_indices");
  for (std::size_t j : theta_indices)
    if (j >= n_theta) throw ValidationError("theta index out of range", "sensors.theta_indices");

  std::vector<Vec3> pts;
  for (std::size_t i = 1; i <= n_phi; ++i) {
    if (!keep_phi(i)) continue;
    const double phi = static_cast<double>(2 * i - 1) * kPi / static_cast<double>(2 * n_phi);
    for (std::size_t j = 0; j < n_theta; ++j) {
      if (!keep_theta(j)) continue;
      const double theta = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n_theta);
      pts.push_back({radius * std::sin(phi) * std::cos(theta), radius * std::sin(phi) * std::sin(theta),
                     radius * std::cos(phi)});
    }
  }
  return SensorArray(std::move(pts));
}

// ---------------------------------------------------------------------------

SamplingGrid::SamplingGrid(Vec3 lower, Vec3 upper, GridIndex resolution)
    : lower_(lower), upper_(upper), resolution_(resolution) {
  if (!finite(lower) || !finite(upper)) throw ValidationError("non-finite corner", "grid");
  if (!(upper.x > lower.x && upper.y > lower.y && upper.z > lower.z))
    throw ValidationError("upper corner must exceed lower corner on every axis", "grid");
  for (std::size_t n : resolution)
    if (n < 2) throw ValidationError("at least 2 points per axis", "grid.resolution");
  spacing_ = {(upper.x - lower.x) / static_cast<double>(resolution[0] - 1),
              (upper.y - lower.y) / static_cast<double>(resolution[1] - 1),
              (upper.z - lower.z) / static_cast<double>(resolution[2] - 1)};
}

Vec3 SamplingGrid::point(const GridIndex& cell) const {
  return {lower_.x + static_cast<double>(cell[0]) * spacing_.x, lower_.y + static_cast<double>(cell[1]) * spacing_.y,
          lower_.z + static_cast<double>(cell[2]) * spacing_.z};
}

std::vector<Vec3> SamplingGrid::points() const {
  std::vector<Vec3> pts(size());
  for (std::size_t l = 0; l < pts.size(); ++l) pts[l] = point(l);
  return pts;
}

bool SamplingGrid::contains(const Vec3& p) const {
  return p.x >= lower_.x && p.x <= upper_.x && p.y >= lower_.y && p.y <= upper_.y && p.z >= lower_.z &&
         p.z <= upper_.z;
}

void require_sensors_outside(const SensorArray& sensors, const SamplingGrid& grid) {
  for (std::size_t i = 0; i < sensors.size(); ++i)
    if (grid.contains(sensors[i]))
      throw ValidationError("sensor " + std::to_string(i) + " lies inside the sampling grid box", "sensors");
}

// ---------------------------------------------------------------------------

StaticSourceSet::StaticSourceSet(std::vector<PointSource> sources) : sources_(std::move(sources)) {
  if (sources_.empty()) throw ValidationError("at least one source required", "sources");
  for (std::size_t j = 0; j < sources_.size(); ++j) {
    if (!finite(sources_[j].location)) throw ValidationError("non-finite location", "sources");
    if (!(sources_[j].intensity > 0.0) || !std::isfinite(sources_[j].intensity))
      throw ValidationError("intensities must be positive", "sources.intensity");
    for (std::size_t i = 0; i < j; ++i)
      if (sources_[i].location == sources_[j].location)
        throw ValidationError("duplicate source location", "sources");
  }
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(Kind kind) : kind_(std::move(kind)) {
  if (const auto* p = std::get_if<PiecewiseLinearPath>(&kind_)) {
    if (p->times.size() < 2 || p->times.size() != p->points.size())
      throw ValidationError("need >= 2 knots and matching times/points", "sources.trajectory");
    for (std::size_t i = 0; i < p->times.size(); ++i) {
      if (!std::isfinite(p->times[i]) || !finite(p->points[i]))
        throw ValidationError("non-finite knot", "sources.trajectory");
      if (i > 0 && !(p->times[i] > p->times[i - 1]))
        throw ValidationError("knot times must be strictly increasing", "sources.trajectory.times");
    }
  }
}

Vec3 Trajectory::position(double t) const {
  return std::visit(
      [t](const auto& path) -> Vec3 {
        using P = std::decay_t<decltype(path)>;
        if constexpr (std::is_same_v<P, StationaryPath>) {
          return path.position;
        } else if constexpr (std::is_same_v<P, CircleModulatedPath>) {
          const double r = path.radius + path.amplitude * std::cos(path.lobes * t);
          return {r * std::cos(t), r * std::sin(t), 0.0};
        } else if constexpr (std::is_same_v<P, HelixPath>) {
          return {path.radius * std::sin(path.omega * t), path.radius * std::cos(path.omega * t),
                  path.radius * (t / kPi - 1.0)};
        } else if constexpr (std::is_same_v<P, ExpandingHelixPath>) {
          const double s = t / kPi;
          return {path.radius * s * std::sin(path.omega * t), path.radius * s * std::cos(path.omega * t),
                  path.radius * (s - 1.0)};
        } else {
          const auto& ts = path.times;
          if (t <= ts.front()) return path.points.front();
          if (t >= ts.back()) return path.points.back();
          const std::size_t j = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
          const double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
          return path.points[j - 1] + w * (path.points[j] - path.points[j - 1]);
        }
      },
      kind_);
}

Vec3 Trajectory::velocity(double t) const {
  return std::visit(
      [this, t](const auto& path) -> Vec3 {
        using P = std::decay_t<decltype(path)>;
        if constexpr (std::is_same_v<P, StationaryPath>) {
          return {};
        } else if constexpr (std::is_same_v<P, CircleModulatedPath>) {
          const double r = path.radius + path.amplitude * std::cos(path.lobes * t);
          const double dr = -path.amplitude * path.lobes * std::sin(path.lobes * t);
          return {dr * std::cos(t) - r * std::sin(t), dr * std::sin(t) + r * std::cos(t), 0.0};
        } else if constexpr (std::is_same_v<P, HelixPath>) {
          const double w = path.omega;
          return {path.radius * w * std::cos(w * t), -path.radius * w * std::sin(w * t), path.radius / kPi};
        } else if constexpr (std::is_same_v<P, ExpandingHelixPath>) {
          const double w = path.omega;
          const double s = t / kPi;
          return {path.radius * (std::sin(w * t) / kPi + s * w * std::cos(w * t)),
                  path.radius * (std::cos(w * t) / kPi - s * w * std::sin(w * t)), path.radius / kPi};
        } else {
          const double h = 1e-6 * (path.times.back() - path.times.front());
          return (position(t + h) - position(t - h)) / (2.0 * h);
        }
      },
      kind_);
}

// ---------------------------------------------------------------------------

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Static:
      return "static";
    case Provenance::Moving:
      return "moving";
    case Provenance::External:
      return "external";
  }
  return "external";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "static") return Provenance::Static;
  if (s == "moving") return Provenance::Moving;
  if (s == "external") return Provenance::External;
  throw ValidationError("unknown provenance '" + s + "'", "provenance");
}

void MeasurementSet::validate() const {
  if (!(wave_speed > 0.0) || !std::isfinite(wave_speed)) throw ValidationError("c must be > 0", "physics.c");
  if (samples.rows() != sensors.size() || samples.cols() != timegrid.steps())
    throw ValidationError("sample matrix shape does not match (N_x, N_T)", "samples");
  for (double v : samples.data())
    if (!std::isfinite(v)) throw ValidationError("non-finite sample", "samples");
  if (noise && !(noise->level >= 0.0)) throw ValidationError("must be >= 0", "noise.level");
}

MeasurementSet add_noise(const MeasurementSet& data, double level, std::uint64_t seed) {
  if (!(level >= 0.0) || !std::isfinite(level)) throw ValidationError("must be >= 0", "noise.level");
  MeasurementSet out = data;
  std::mt19937_64 gen(seed);
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  for (double& u : out.samples.data()) {
    const double r = 2.0 * static_cast<double>(gen() >> 11) * kScale - 1.0;
    u = (1.0 + level * r) * u;
  }
  out.noise = NoiseInfo{level, seed, kNoiseGeneratorId};
  return out;
}

}  // namespace wavesrc
