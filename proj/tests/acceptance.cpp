// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "wavesrc/commands.hpp"
#include "wavesrc/config.hpp"
#include "wavesrc/error.hpp"
#include "wavesrc/forward.hpp"
#include "wavesrc/invmoving.hpp"
#include "wavesrc/invstatic.hpp"

namespace fs = std::filesystem;
using namespace wavesrc;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void run(const std::string& id, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

const fs::path kConfigs = WAVESRC_CONFIG_DIR;
const fs::path kWork = fs::temp_directory_path() / ("wavesrc_acceptance_" + std::to_string(::getpid()));

ExperimentConfig config(const std::string& name) { return load_config(kConfigs / name); }

/// simulate then invert into kWork/tag; returns the inversion directory.
fs::path pipeline(const ExperimentConfig& cfg, const std::string& tag, bool moving, const RunOptions& opts = {}) {
  const fs::path sim = kWork / tag / "sim";
  const fs::path inv = kWork / tag / "inv";
  cmd_simulate(cfg, sim, opts);
  if (moving)
    cmd_invert_moving(cfg, sim / "measurements.json", inv, opts);
  else
    cmd_invert_static(cfg, sim / "measurements.json", inv, opts);
  return inv;
}

struct FoundPeak {
  Vec3 location;
  double intensity;
};

std::vector<FoundPeak> read_peaks(const fs::path& dir) {
  const Table t = read_table(dir / "peaks.csv");
  std::vector<FoundPeak> out;
  for (std::size_t r = 0; r < t.at("x").size(); ++r)
    out.push_back({{t.at("x")[r], t.at("y")[r], t.at("z")[r]}, t.at("intensity")[r]});
  return out;
}

std::string describe(const std::vector<FoundPeak>& peaks) {
  std::string s;
  for (const auto& p : peaks)
    s += " (" + fmt(p.location.x, 3) + "," + fmt(p.location.y, 3) + "," + fmt(p.location.z, 3) + ")=" +
         fmt(p.intensity, 3);
  return s;
}

double max_norm(const Vec3& a, const Vec3& b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

/// True if some bijection between `peaks` and `truth` satisfies `ok` pairwise.
bool matchable(std::size_t n, const std::function<bool(std::size_t peak, std::size_t truth)>& ok) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool all = true;
    for (std::size_t p = 0; p < n && all; ++p) all = ok(p, perm[p]);
    if (all) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

Outcome four_sources(const std::string& name) {
  const ExperimentConfig cfg = config(name);
  const auto peaks = read_peaks(pipeline(cfg, name, false));
  const auto& truth = cfg.static_sources->sources();
  if (peaks.size() < 4) return {false, std::to_string(peaks.size()) + " peaks:" + describe(peaks)};
  const bool ok = matchable(4, [&](std::size_t p, std::size_t t) {
    return distance(peaks[p].location, truth[t].location) <= 0.2 + 1e-9;
  });
  return {ok, "top 4 of " + std::to_string(peaks.size()) + " peaks:" + describe(peaks)};
}

Outcome six_sources() {
  const ExperimentConfig cfg = config("six_sources.json");
  const auto peaks = read_peaks(pipeline(cfg, "six_sources", false));
  const std::string detail = std::to_string(peaks.size()) + " peaks:" + describe(peaks);
  if (peaks.size() != 5) return {false, detail};
  const double h = cfg.grid.spacing().x;
  const Vec3 pair_a{-1, -1, 0};
  const Vec3 pair_b{-1, -1.2, 0};
  const std::vector<PointSource> rest{{{0, 1, 0}, 2}, {{1, 0.5, 0}, 4}, {{-0.5, 0.5, 0}, 3}, {{1.5, -1, 0}, 3}};
  for (std::size_t m = 0; m < 5; ++m) {
    const auto& p = peaks[m];
    const bool near_pair = std::min(max_norm(p.location, pair_a), max_norm(p.location, pair_b)) <= h + 1e-9;
    if (!near_pair || std::abs(p.intensity - 5.0) > 0.2 * 5.0) continue;
    std::vector<FoundPeak> others;
    for (std::size_t q = 0; q < 5; ++q)
      if (q != m) others.push_back(peaks[q]);
    const bool ok = matchable(4, [&](std::size_t p, std::size_t t) {
      return max_norm(others[p].location, rest[t].location) <= h + 1e-9 &&
             std::abs(others[p].intensity - rest[t].intensity) <= 0.2 * rest[t].intensity;
    });
    if (ok) return {true, detail};
  }
  return {false, detail};
}

Outcome circle(const std::string& name, double bound) {
  const ExperimentConfig cfg = config(name);
  const Table est = read_table(pipeline(cfg, name, true) / "estimate_repaired.csv");
  double worst = 0.0;
  for (std::size_t r = 0; r < est.at("t").size(); ++r) {
    const Vec3 s{est.at("sx")[r], est.at("sy")[r], est.at("sz")[r]};
    worst = std::max(worst, distance(s, cfg.trajectory->position(est.at("t")[r])));
  }
  return {worst < bound, "max error " + fmt(worst) + " (bound " + fmt(bound) + ")"};
}

Outcome strokes() {
  const ExperimentConfig cfg = config("strokes.json");
  const fs::path inv = pipeline(cfg, "strokes", true);
  const Table seg = read_table(inv / "segments.csv");
  const Table smooth = read_table(inv / "segment_smooth.csv");
  const std::size_t count = seg.at("segment").size();
  std::size_t fitted = 0;
  for (double f : seg.at("fitted")) fitted += f != 0.0;
  double worst = 0.0;
  for (std::size_t r = 0; r < smooth.at("t").size(); ++r) {
    const Vec3 s{smooth.at("x")[r], smooth.at("y")[r], smooth.at("z")[r]};
    worst = std::max(worst, distance(s, cfg.trajectory->position(smooth.at("t")[r])));
  }
  return {count == 5 && fitted > 0 && worst < 0.15, std::to_string(count) + " segments, " + std::to_string(fitted) +
                                                        " fitted, max model deviation " + fmt(worst)};
}

Vec3 random_on_sphere(std::mt19937_64& gen, double radius) {
  std::normal_distribution<double> n;
  const Vec3 v{n(gen), n(gen), n(gen)};
  return radius / norm(v) * v;
}

Vec3 random_in_box(std::mt19937_64& gen, double half) {
  std::uniform_real_distribution<double> u(-half, half);
  return {u(gen), u(gen), u(gen)};
}

double bisection_oracle(const Vec3& x, double t, const Trajectory& traj, double c) {
  auto g = [&](double tau) { return t - tau - distance(x, traj.position(tau)) / c; };
  double lo = 0.0;
  double hi = t;
  for (int n = 0; n < 200; ++n) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (g(mid) >= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::MatrixXd dense_kernel(const SensorArray& sensors, const TimeGrid& tg, const SamplingGrid& grid, double c) {
  const std::size_t nt = tg.steps();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(sensors.size() * nt), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t l = 0; l < grid.size(); ++l)
    for (std::size_t i = 0; i < sensors.size(); ++i) {
      const double r = distance(sensors[i], grid.point(l));
      for (std::size_t k = 0; k < nt; ++k) {
        const double s = tg.sample(k) - r / c;
        const double v = s < 0.0 ? 0.0 : std::sin(10.0 * s) * std::exp(-0.3 * (s - 3.0) * (s - 3.0));
        A(static_cast<Eigen::Index>(i * nt + k), static_cast<Eigen::Index>(l)) = v / (4.0 * kPi * r);
      }
    }
  return A;
}

Eigen::VectorXd as_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(gen);
  return v;
}

Outcome causality() {
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> speed(0.5, 3.0);
  std::uniform_real_distribution<double> radius(3.0, 6.0);
  std::size_t checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double c = speed(gen);
    std::vector<Vec3> pts;
    for (int i = 0; i < 6; ++i) pts.push_back(random_on_sphere(gen, radius(gen)));
    std::vector<PointSource> srcs;
    for (int j = 1 + trial % 4; j > 0; --j) srcs.push_back({random_in_box(gen, 2.0), 1.0 + j});
    const SensorArray sensors(pts);
    const TimeGrid tg(8.0, 64);
    const MeasurementSet d = synthesize_static(StaticSourceSet(srcs), sensors, tg, Signal(), c);
    for (std::size_t i = 0; i < sensors.size(); ++i) {
      double first = 1e300;
      for (const auto& s : srcs) first = std::min(first, distance(sensors[i], s.location) / c);
      for (std::size_t k = 0; k < tg.steps() && tg.sample(k) < first; ++k, ++checked)
        if (d.samples(i, k) != 0.0) return {false, "nonzero sample before arrival in trial " + std::to_string(trial)};
    }
  }
  return {true, std::to_string(checked) + " pre-arrival samples zero over 100 geometries"};
}

Outcome retarded_residual() {
  const std::vector<Trajectory> paths{Trajectory(CircleModulatedPath{}), Trajectory(HelixPath{}),
                                      Trajectory(ExpandingHelixPath{})};
  const auto params = RetardedSolveParams::for_horizon(2.0 * kPi);
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> time(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> speed(20.0, 340.0);
  std::uniform_real_distribution<double> radius(3.0, 8.0);
  double worst = 0.0;
  int solved = 0;
  for (int n = 0; n < 10000; ++n) {
    const Trajectory& traj = paths[static_cast<std::size_t>(n) % paths.size()];
    const double c = speed(gen);
    const Vec3 x = random_on_sphere(gen, radius(gen));
    const double t = time(gen);
    const auto tau = retarded_time(x, t, traj, c, params);
    if (!tau) {
      if (t >= distance(x, traj.position(0.0)) / c) return {false, "no solution where one exists, draw " + std::to_string(n)};
      continue;
    }
    ++solved;
    worst = std::max({worst, std::abs(t - *tau - distance(x, traj.position(*tau)) / c),
                      std::abs(*tau - bisection_oracle(x, t, traj, c))});
  }
  return {worst <= 1e-10, std::to_string(solved) + " solved draws, worst " + fmt(worst, 3)};
}

Outcome frozen() {
  std::mt19937_64 gen(77);
  const SensorArray sensors = sphere_sensors(5.0, 4, 4);
  const TimeGrid tg(2.0 * kPi, 64);
  const auto params = RetardedSolveParams::for_horizon(2.0 * kPi);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 s0 = random_in_box(gen, 2.0);
    const auto moving = synthesize_moving(Trajectory(StationaryPath{s0}), sensors, tg, Signal(), 3.0, params);
    const auto fixed = synthesize_static(StaticSourceSet({{s0, 1.0}}), sensors, tg, Signal(), 3.0);
    for (std::size_t n = 0; n < fixed.samples.data().size(); ++n)
      worst = std::max(worst, std::abs(moving.samples.data()[n] - fixed.samples.data()[n]));
  }
  return {worst <= 1e-14, "worst difference " + fmt(worst, 3)};
}

Outcome adjoint() {
  const SensorArray sensors({{3, 0, 0}, {0, -3.5, 0}, {0, 0.5, 4}, {-3, 2, 1}});
  const TimeGrid tg(8.0, 8);
  const SamplingGrid grid({-1, -1, -1}, {1, 1, 1}, {3, 3, 3});
  const AcquisitionGeometry g{sensors, tg, Signal(), 1.0};
  const Eigen::MatrixXd A = dense_kernel(sensors, tg, grid, 1.0);
  const auto v = random_vector(grid.size(), 1);
  const auto w = random_vector(sensors.size() * tg.steps(), 2);
  const Eigen::VectorXd Av = as_eigen(forward_apply(v, grid, g));
  const Eigen::VectorXd Atw = as_eigen(adjoint_apply(w, grid, g));
  const double fwd = (Av - A * as_eigen(v)).norm() / (A * as_eigen(v)).norm();
  const double adj = (Atw - A.transpose() * as_eigen(w)).norm() / (A.transpose() * as_eigen(w)).norm();
  const double ip = std::abs(Av.dot(as_eigen(w)) - as_eigen(v).dot(Atw)) / (Av.norm() * as_eigen(w).norm());
  const double worst = std::max({fwd, adj, ip});
  return {worst <= 1e-12, "forward " + fmt(fwd, 3) + ", adjoint " + fmt(adj, 3) + ", inner product " + fmt(ip, 3)};
}

Outcome cgnr_vs_dense() {
  const SensorArray sensors = sphere_sensors(5.0, 8, 8);
  const TimeGrid tg(15.0, 64);
  const SamplingGrid grid({-1, -1, -1}, {1, 1, 1}, {3, 3, 3});
  const MeasurementSet data = add_noise(
      synthesize_static(StaticSourceSet({{{0.3, -0.4, 0.1}, 1.0}, {{-0.7, 0.6, 0.5}, 2.0}}), sensors, tg, Signal(),
                        1.0),
      0.01, 3);
  SolverOptions opts;
  opts.tolerance = 1e-12;
  const CoefficientField f = cgnr_solve(data, grid, Signal(), opts);
  const Eigen::MatrixXd A = dense_kernel(sensors, tg, grid, 1.0);
  const std::vector<double> u(data.samples.data().begin(), data.samples.data().end());
  const Eigen::VectorXd oracle = A.householderQr().solve(as_eigen(u));
  const double rel = (as_eigen(f.values) - oracle).norm() / oracle.norm();
  return {rel <= 1e-6, "relative difference " + fmt(rel, 3) + " after " + std::to_string(f.report.iterations) +
                           " iterations"};
}

Outcome fourier_exact() {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (double period : {2.0 * kPi, 15.0})
    for (std::size_t deg = 0; deg <= 5; ++deg) {
      const TimeGrid tg(period, 64);
      std::vector<Vec3> a(deg + 1);
      std::vector<Vec3> b(deg + 1);
      for (std::size_t n = 0; n <= deg; ++n) {
        a[n] = {u(gen), u(gen), u(gen)};
        b[n] = {u(gen), u(gen), u(gen)};
      }
      std::vector<Vec3> pts;
      for (double t : tg.samples()) {
        Vec3 s = a[0];
        for (std::size_t n = 1; n <= deg; ++n) {
          const double w = 2.0 * kPi * static_cast<double>(n) / period;
          s += std::cos(w * t) * a[n] + std::sin(w * t) * b[n];
        }
        pts.push_back(s);
      }
      const FourierModel m = fourier_smooth(tg.samples(), pts, 5, period);
      for (std::size_t k = 0; k < pts.size(); ++k) worst = std::max(worst, norm(m(tg.sample(k)) - pts[k]));
    }
  return {worst <= 1e-12, "worst sample error " + fmt(worst, 3)};
}

Outcome indicator_static() {
  const SamplingGrid grid({-2, -2, -2}, {2, 2, 2}, {9, 9, 9});
  const SensorArray sensors = sphere_sensors(5.0, 8, 8);
  const TimeGrid tg(15.0, 64);
  std::size_t checked = 0;
  for (const GridIndex& cell : {GridIndex{2, 6, 4}, GridIndex{4, 4, 4}, GridIndex{0, 8, 1}}) {
    const Vec3 s0 = grid.point(cell);
    const auto data = synthesize_static(StaticSourceSet({{s0, 1.0}}), sensors, tg, Signal(), 1.0);
    const TrajectoryEstimate est = locate_per_step(data, grid, Signal());
    double arrival = 0.0;
    for (std::size_t i = 0; i < sensors.size(); ++i) arrival = std::max(arrival, distance(sensors[i], s0));
    for (std::size_t k = 0; k < tg.steps(); ++k) {
      if (tg.sample(k) <= arrival) continue;
      ++checked;
      if (est.locations[k] != s0) return {false, "step " + std::to_string(k + 1) + " misses the source cell"};
    }
  }
  return {true, std::to_string(checked) + " post-arrival steps at the source cell"};
}

Outcome determinism() {
  ExperimentConfig st = config("four_sources.json");
  st.grid = SamplingGrid({-2, -2, -2}, {2, 2, 2}, {9, 9, 9});
  st.solver.max_iterations = 100;
  ExperimentConfig mv = config("circle.json");
  mv.grid = SamplingGrid({-3, -3, -3}, {3, 3, 3}, {13, 13, 13});
  auto outputs = [](const ExperimentConfig& cfg, const std::string& tag, bool moving, int threads) {
    const fs::path inv = pipeline(cfg, tag, moving, RunOptions{threads, std::nullopt});
    const auto sim = read_manifest(kWork / tag / "sim" / "manifest.json");
    const auto run = read_manifest(inv / "manifest.json");
    return to_json(sim)["outputs"].dump() + to_json(run)["outputs"].dump();
  };
  int runs = 0;
  for (bool moving : {false, true}) {
    const ExperimentConfig& cfg = moving ? mv : st;
    const std::string ref = outputs(cfg, moving ? "det_m_ref" : "det_s_ref", moving, 1);
    for (int threads : {1, 2, 3}) {
      ++runs;
      const std::string tag = std::string(moving ? "det_m_" : "det_s_") + std::to_string(threads);
      if (outputs(cfg, tag, moving, threads) != ref)
        return {false, std::string(moving ? "moving" : "static") + " outputs differ at " + std::to_string(threads) +
                           " threads"};
    }
  }
  return {true, std::to_string(runs) + " repeated runs byte-identical to the single-thread reference"};
}

}  // namespace

int main() {
  fs::create_directories(kWork);
  run("AC1 four unit sources, 1% noise", [] { return four_sources("four_sources.json"); });
  run("AC1 four unit sources, 5% noise", [] { return four_sources("four_sources_eps5.json"); });
  run("AC2 six sources with a merging pair", six_sources);
  run("AC3 circular trajectory on 31^3", [] { return circle("circle_coarse.json", 0.4); });
  run("AC3 circular trajectory on 51^3", [] { return circle("circle.json", 0.2); });
  run("AC4a forward causality", causality);
  run("AC4b retarded-time residual", retarded_residual);
  run("AC4c frozen-trajectory equivalence", frozen);
  run("AC4d adjoint identity", adjoint);
  run("AC4e CGNR vs dense least squares", cgnr_vs_dense);
  run("AC4f Fourier exactness", fourier_exact);
  run("AC4g static indicator argmax", indicator_static);
  run("AC4h determinism across thread counts", determinism);
  run("AC5 stroke segmentation", strokes);
  std::error_code ec;
  fs::remove_all(kWork, ec);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
