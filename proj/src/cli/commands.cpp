#include "wavesrc/commands.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "wavesrc/error.hpp"
#include "wavesrc/forward.hpp"
#include "wavesrc/invmoving.hpp"
#include "wavesrc/invstatic.hpp"
#include "wavesrc/simd.hpp"

#ifndef WAVESRC_VERSION
#define WAVESRC_VERSION "dev"
#endif

namespace wavesrc {

namespace fs = std::filesystem;

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

RunManifest start_manifest(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opts) {
  RunManifest m;
  m.command = command;
  m.tool_version = WAVESRC_VERSION;
  m.config = to_json(cfg);
  m.generator = kNoiseGeneratorId;
  m.seed = cfg.noise.seed;
  m.isa = simd::active().name;
  m.threads = opts.threads;
  return m;
}

ExperimentConfig with_overrides(ExperimentConfig cfg, const RunOptions& opts) {
  if (opts.seed) cfg.noise.seed = *opts.seed;
  cfg.solver.threads = opts.threads;
  return cfg;
}

/// CSV writer: header plus rows of full-precision numbers.
class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& header) : out_(path, std::ios::binary) {
    if (!out_) throw ValidationError("cannot write '" + path.string() + "'");
    out_ << header << '\n';
  }

  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::ofstream out_;
};

void write_estimate(const TrajectoryEstimate& est, const fs::path& path) {
  CsvWriter w(path, "k,t,sx,sy,sz,indicator,repaired");
  for (std::size_t k = 0; k < est.size(); ++k) {
    const Vec3& s = est.locations[k];
    w.row(k + 1, est.times[k], s.x, s.y, s.z, est.peak_values[k], static_cast<bool>(est.repaired[k]));
  }
}

void write_fourier_rows(CsvWriter& w, const FourierModel& m, const std::string& prefix) {
  auto emit = [&](std::size_t n, const Vec3& a, const Vec3& b) {
    if (prefix.empty())
      w.row(n, a.x, a.y, a.z, b.x, b.y, b.z, m.period, m.origin);
    else
      w.row(prefix, n, a.x, a.y, a.z, b.x, b.y, b.z, m.period, m.origin);
  };
  emit(0, m.a0, Vec3{});
  for (std::size_t n = 1; n <= m.order; ++n) emit(n, m.a[n - 1], m.b[n - 1]);
}

}  // namespace

// ---------------------------------------------------------------------------

RunManifest cmd_simulate(const ExperimentConfig& config, const fs::path& out, const RunOptions& opts) {
  const ExperimentConfig cfg = with_overrides(config, opts);
  RunManifest m = start_manifest("simulate", cfg, opts);
  Stopwatch clock;

  const SensorArray sensors = cfg.sensors.build();
  MeasurementSet data = [&] {
    if (cfg.static_sources)
      return synthesize_static(*cfg.static_sources, sensors, cfg.time, cfg.signal, cfg.wave_speed, opts.threads);
    if (cfg.trajectory)
      return synthesize_moving(*cfg.trajectory, sensors, cfg.time, cfg.signal, cfg.wave_speed, cfg.retarded,
                               opts.threads);
    throw ValidationError("simulate needs a source description", "sources");
  }();
  m.timings["synthesize_s"] = clock.lap();
  data = add_noise(data, cfg.noise.level, cfg.noise.seed);

  fs::create_directories(out);
  write_measurements(data, out, "measurements", cfg.signal);
  m.record_output(out, "measurements.csv");
  m.record_output(out, "measurements.json");
  m.timings["write_s"] = clock.lap();
  write_manifest(m, out / "manifest.json");
  return m;
}

RunManifest cmd_invert_static(const ExperimentConfig& config, const fs::path& data_path, const fs::path& out,
                              const RunOptions& opts) {
  const ExperimentConfig cfg = with_overrides(config, opts);
  RunManifest m = start_manifest("invert-static", cfg, opts);
  Stopwatch clock;

  const MeasurementSet data = read_measurements(data_path);
  m.timings["read_s"] = clock.lap();
  const CoefficientField field = cgnr_solve(data, cfg.grid, cfg.signal, cfg.solver);
  m.timings["solve_s"] = clock.lap();
  const PeakReport peaks = extract_peaks(field, cfg.solver);
  const std::vector<std::size_t> maxima = local_maxima(field);

  fs::create_directories(out);
  const SamplingGrid& g = field.grid;
  {
    CsvWriter w(out / "coefficients.csv", "l,i,j,k,x,y,z,c");
    for (std::size_t l = 0; l < g.size(); ++l) {
      const GridIndex c = g.cell_of(l);
      const Vec3 p = g.point(c);
      w.row(l, c[0], c[1], c[2], p.x, p.y, p.z, field.values[l]);
    }
  }
  {
    CsvWriter w(out / "peaks.csv", "n,l,i,j,k,x,y,z,intensity");
    for (std::size_t n = 0; n < peaks.peaks.size(); ++n) {
      const Peak& p = peaks.peaks[n];
      w.row(n + 1, p.index, p.cell[0], p.cell[1], p.cell[2], p.location.x, p.location.y, p.location.z, p.intensity);
    }
  }
  auto write_cells = [&](const std::string& name, const std::vector<std::size_t>& cells) {
    CsvWriter w(out / name, "l,i,j,k,x,y,z,c");
    for (std::size_t l : cells) {
      const GridIndex c = g.cell_of(l);
      const Vec3 p = g.point(c);
      w.row(l, c[0], c[1], c[2], p.x, p.y, p.z, field.values[l]);
    }
  };
  write_cells("isosurface.csv", peaks.isosurface_cells);
  write_cells("local_maxima.csv", maxima);
  {
    const SolverReport& r = field.report;
    CsvWriter w(out / "solver_trace.csv", "iteration,relative_normal_residual,residual");
    for (std::size_t i = 0; i < r.residual_trace.size(); ++i)
      w.row(i, i < r.normal_residual_trace.size() ? r.normal_residual_trace[i] : 0.0, r.residual_trace[i]);
  }
  for (const char* f : {"coefficients.csv", "peaks.csv", "isosurface.csv", "local_maxima.csv", "solver_trace.csv"})
    m.record_output(out, f);

  m.timings["postprocess_s"] = clock.lap();
  m.timings["iterations"] = static_cast<double>(field.report.iterations);
  if (field.report.zero_data) m.warnings.push_back("measurements are zero; returned the zero field");
  if (!field.report.converged)
    m.warnings.push_back("iteration cap reached at relative normal residual " +
                         format_double(field.report.relative_normal_residual));
  m.warnings.push_back(std::string("peak extraction stopped on ") +
                       (peaks.termination == PeakTermination::Threshold ? "threshold" : "max-count"));
  write_manifest(m, out / "manifest.json");
  return m;
}

std::vector<std::string> moving_regime_warnings(const ExperimentConfig& cfg, const SensorArray& sensors) {
  std::vector<std::string> out;
  if (cfg.trajectory) {
    const double ratio = max_speed(*cfg.trajectory, cfg.time) / cfg.wave_speed;
    if (ratio > 0.1)
      out.push_back("sampled max |v|/c = " + format_double(ratio) + " > 0.1: per-step estimates may be biased");
  }
  if (const auto* p = std::get_if<GaussianModulatedSine>(&cfg.signal.kind())) {
    double diameter = 0.0;
    for (std::size_t i = 0; i < sensors.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) diameter = std::max(diameter, distance(sensors[i], sensors[j]));
    const double phase = diameter * std::abs(p->omega) / cfg.wave_speed;
    if (phase > 1.0)
      out.push_back("sensor diameter times omega / c = " + format_double(phase) +
                    " > 1: the source moves appreciably within one propagation delay");
  }
  return out;
}

RunManifest cmd_invert_moving(const ExperimentConfig& config, const fs::path& data_path, const fs::path& out,
                              const RunOptions& opts) {
  const ExperimentConfig cfg = with_overrides(config, opts);
  RunManifest m = start_manifest("invert-moving", cfg, opts);
  Stopwatch clock;

  const MeasurementSet data = read_measurements(data_path);
  m.warnings = moving_regime_warnings(cfg, data.sensors);
  m.timings["read_s"] = clock.lap();

  const TrajectoryEstimate raw = locate_per_step(data, cfg.grid, cfg.signal, opts.threads);
  m.timings["scan_s"] = clock.lap();
  const PostprocessOptions& pp = cfg.postprocess;
  const TrajectoryEstimate repaired = repair_trajectory(raw, cfg.signal, pp.repair_threshold);
  const FourierModel model = fourier_smooth(repaired, pp.fourier_order, pp.fourier_period);
  const SegmentedTrajectory strokes = segment_strokes(repaired, pp.stroke_gap, pp.stroke_fourier_order);

  fs::create_directories(out);
  write_estimate(raw, out / "estimate_raw.csv");
  write_estimate(repaired, out / "estimate_repaired.csv");
  {
    CsvWriter w(out / "fourier.csv", "n,ax,ay,az,bx,by,bz,period,origin");
    write_fourier_rows(w, model, "");
  }
  {
    CsvWriter w(out / "smooth.csv", "k,t,x,y,z");
    for (std::size_t k = 0; k < repaired.size(); ++k) {
      const Vec3 s = model(repaired.times[k]);
      w.row(k + 1, repaired.times[k], s.x, s.y, s.z);
    }
  }
  {
    CsvWriter seg(out / "segments.csv", "segment,start_k,end_k,samples,fitted");
    CsvWriter coef(out / "segment_fourier.csv", "segment,n,ax,ay,az,bx,by,bz,period,origin");
    CsvWriter smooth(out / "segment_smooth.csv", "segment,k,t,x,y,z");
    for (std::size_t s = 0; s < strokes.segments.size(); ++s) {
      const Segment& sg = strokes.segments[s];
      seg.row(s + 1, sg.begin + 1, sg.end, sg.size(), sg.model.has_value());
      if (!sg.model) continue;
      write_fourier_rows(coef, *sg.model, std::to_string(s + 1));
      for (std::size_t k = sg.begin; k < sg.end; ++k) {
        const Vec3 p = (*sg.model)(repaired.times[k]);
        smooth.row(s + 1, k + 1, repaired.times[k], p.x, p.y, p.z);
      }
    }
  }
  for (const char* f : {"estimate_raw.csv", "estimate_repaired.csv", "fourier.csv", "smooth.csv", "segments.csv",
                        "segment_fourier.csv", "segment_smooth.csv"})
    m.record_output(out, f);
  m.timings["postprocess_s"] = clock.lap();
  write_manifest(m, out / "manifest.json");
  return m;
}

// ---------------------------------------------------------------------------

Table read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty table '" + path.string() + "'");
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) names.push_back(name);
  }
  Table t;
  for (const auto& n : names) t[n];
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (!std::getline(ss, cell, ','))
        throw ValidationError("short row in '" + path.string() + "'");
      try {
        t[names[c]].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError("non-numeric cell '" + cell + "' in '" + path.string() + "'");
      }
    }
  }
  return t;
}

RunManifest cmd_plotdata(const ExperimentConfig& cfg, const fs::path& run_dir, const fs::path& out) {
  RunManifest m = start_manifest("plot-data", cfg, RunOptions{});
  fs::create_directories(out);
  bool any = false;

  if (fs::exists(run_dir / "coefficients.csv")) {
    any = true;
    const Table coeffs = read_table(run_dir / "coefficients.csv");
    const SamplingGrid& g = cfg.grid;
    const auto& values = coeffs.at("c");
    if (values.size() != g.size()) throw ValidationError("coefficient file does not match the configured grid", "grid");

    std::vector<std::size_t> centres;
    if (fs::exists(run_dir / "peaks.csv"))
      for (double l : read_table(run_dir / "peaks.csv").at("l")) centres.push_back(static_cast<std::size_t>(l));
    if (centres.empty())
      centres.push_back(static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin()));

    {
      CsvWriter w(out / "field_slices.csv", "peak,slice_axis,i,j,k,x,y,z,c");
      const GridIndex& res = g.resolution();
      for (std::size_t p = 0; p < centres.size(); ++p) {
        const GridIndex centre = g.cell_of(centres[p]);
        for (int axis = 0; axis < 3; ++axis)
          for (std::size_t i = 0; i < res[0]; ++i)
            for (std::size_t j = 0; j < res[1]; ++j)
              for (std::size_t k = 0; k < res[2]; ++k) {
                const GridIndex cell{i, j, k};
                if (cell[static_cast<std::size_t>(axis)] != centre[static_cast<std::size_t>(axis)]) continue;
                const Vec3 pt = g.point(cell);
                w.row(p + 1, axis + 1, i, j, k, pt.x, pt.y, pt.z, values[g.index_of(cell)]);
              }
      }
    }
    m.record_output(out, "field_slices.csv");

    if (fs::exists(run_dir / "isosurface.csv")) {
      const Table iso = read_table(run_dir / "isosurface.csv");
      {
        CsvWriter iw(out / "isosurface_cells.csv", "i,j,k,x,y,z,c");
        for (std::size_t r = 0; r < iso.at("l").size(); ++r)
          iw.row(static_cast<std::size_t>(iso.at("i")[r]), static_cast<std::size_t>(iso.at("j")[r]),
                 static_cast<std::size_t>(iso.at("k")[r]), iso.at("x")[r], iso.at("y")[r], iso.at("z")[r],
                 iso.at("c")[r]);
      }
      m.record_output(out, "isosurface_cells.csv");
    }
  }

  if (fs::exists(run_dir / "estimate_raw.csv")) {
    any = true;
    struct Series {
      std::string name;
      Table table;
      const char* x;
    };
    std::vector<Series> series;
    series.push_back({"raw", read_table(run_dir / "estimate_raw.csv"), "sx"});
    if (fs::exists(run_dir / "estimate_repaired.csv"))
      series.push_back({"repaired", read_table(run_dir / "estimate_repaired.csv"), "sx"});
    if (fs::exists(run_dir / "smooth.csv")) series.push_back({"smooth", read_table(run_dir / "smooth.csv"), "x"});

    auto point = [](const Series& s, std::size_t r) {
      const bool est = std::string(s.x) == "sx";
      return Vec3{s.table.at(est ? "sx" : "x")[r], s.table.at(est ? "sy" : "y")[r], s.table.at(est ? "sz" : "z")[r]};
    };
    const auto& times = series.front().table.at("t");

    {
      CsvWriter w(out / "trajectory_overlay.csv", "series,k,t,x,y,z");
      if (cfg.trajectory)
        for (std::size_t r = 0; r < times.size(); ++r) {
          const Vec3 p = cfg.trajectory->position(times[r]);
          w.row("truth", r + 1, times[r], p.x, p.y, p.z);
        }
      for (const Series& s : series)
        for (std::size_t r = 0; r < s.table.at("t").size(); ++r) {
          const Vec3 p = point(s, r);
          w.row(s.name, r + 1, s.table.at("t")[r], p.x, p.y, p.z);
        }
    }
    m.record_output(out, "trajectory_overlay.csv");

    if (cfg.trajectory) {
      std::string header = "k,t";
      for (const Series& s : series) header += "," + s.name + "_error";
      {
        CsvWriter e(out / "error_curves.csv", header);
        for (std::size_t r = 0; r < times.size(); ++r) {
          const Vec3 truth = cfg.trajectory->position(times[r]);
          std::ostringstream line;
          line << (r + 1) << ',' << format_double(times[r]);
          for (const Series& s : series) line << ',' << format_double(distance(point(s, r), truth));
          e.row(line.str());
        }
      }
      m.record_output(out, "error_curves.csv");
    }
  }

  if (!any) throw ValidationError("no inversion outputs found in '" + run_dir.string() + "'", "data");
  write_manifest(m, out / "manifest.json");
  return m;
}

}  // namespace wavesrc
