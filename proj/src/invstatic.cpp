#include "wavesrc/invstatic.hpp"

#include <algorithm>
#include <cmath>

#include "wavesrc/error.hpp"
#include "wavesrc/forward.hpp"
#include "wavesrc/parallel.hpp"
#include "wavesrc/simd.hpp"

namespace wavesrc {

void SolverOptions::validate() const {
  if (!(tolerance > 0.0)) throw ValidationError("must be > 0", "solver.tolerance");
  if (!(tikhonov >= 0.0)) throw ValidationError("must be >= 0", "solver.tikhonov");
  if (max_iterations < 1) throw ValidationError("must be >= 1", "solver.max_iterations");
  if (!(intensity_threshold > 0.0)) throw ValidationError("must be > 0", "solver.intensity_threshold");
  if (!(isosurface_fraction > 0.0 && isosurface_fraction <= 1.0))
    throw ValidationError("must be in (0, 1]", "solver.isosurface_fraction");
}

// ---------------------------------------------------------------------------

KernelOperator::KernelOperator(AcquisitionGeometry geometry, SamplingGrid grid, std::size_t cache_budget_bytes,
                               int threads)
    : geometry_(std::move(geometry)),
      grid_(std::move(grid)),
      threads_(threads),
      rows_(geometry_.sensors.size() * geometry_.timegrid.steps()),
      times_(geometry_.timegrid.samples()) {
  if (!(geometry_.wave_speed > 0.0)) throw ValidationError("c must be > 0", "physics.c");
  require_sensors_outside(geometry_.sensors, grid_);

  const std::size_t n = grid_.size();
  if (rows_ * n <= cache_budget_bytes / sizeof(double)) {
    cache_.resize(rows_ * n);
    parallel_for(n, threads_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t l = begin; l < end; ++l)
        column(l, 0, geometry_.sensors.size(), std::span<double>(cache_).subspan(l * rows_, rows_));
    });
  }
}

void KernelOperator::column(std::size_t l, std::size_t sensor_begin, std::size_t sensor_end,
                            std::span<double> out) const {
  const Vec3 z = grid_.point(l);
  const std::size_t nt = times_.size();
  const double c = geometry_.wave_speed;
  for (std::size_t i = sensor_begin; i < sensor_end; ++i) {
    const double d = distance(geometry_.sensors[i], z);
    double* dst = out.data() + (i - sensor_begin) * nt;
    for (std::size_t k = 0; k < nt; ++k) dst[k] = kernel_value(times_[k], d, geometry_.signal, c);
  }
}

void KernelOperator::apply(std::span<const double> coeffs, std::span<double> out) const {
  if (coeffs.size() != cols() || out.size() != rows_) throw ValidationError("size mismatch in A c");
  const std::size_t n = cols();
  const std::size_t nt = times_.size();

  if (cached()) {
    parallel_for(rows_, threads_, [&](std::size_t begin, std::size_t end) {
      auto y = out.subspan(begin, end - begin);
      std::fill(y.begin(), y.end(), 0.0);
      for (std::size_t l = 0; l < n; ++l)
        simd::axpy(coeffs[l], std::span<const double>(cache_).subspan(l * rows_ + begin, end - begin), y);
    });
    return;
  }

  parallel_for(geometry_.sensors.size(), threads_, [&](std::size_t begin, std::size_t end) {
    auto y = out.subspan(begin * nt, (end - begin) * nt);
    std::fill(y.begin(), y.end(), 0.0);
    std::vector<double> col(y.size());
    for (std::size_t l = 0; l < n; ++l) {
      column(l, begin, end, col);
      simd::axpy(coeffs[l], col, y);
    }
  });
}

void KernelOperator::apply_adjoint(std::span<const double> residual, std::span<double> out) const {
  if (residual.size() != rows_ || out.size() != cols()) throw ValidationError("size mismatch in A^T r");
  parallel_for(cols(), threads_, [&](std::size_t begin, std::size_t end) {
    std::vector<double> scratch;
    if (!cached()) scratch.resize(rows_);
    for (std::size_t l = begin; l < end; ++l) {
      std::span<const double> col;
      if (cached()) {
        col = std::span<const double>(cache_).subspan(l * rows_, rows_);
      } else {
        column(l, 0, geometry_.sensors.size(), scratch);
        col = scratch;
      }
      out[l] = simd::dot(col, residual);
    }
  });
}

std::vector<double> forward_apply(std::span<const double> coeffs, const SamplingGrid& grid,
                                  const AcquisitionGeometry& geometry) {
  const KernelOperator op(geometry, grid);
  std::vector<double> out(op.rows());
  op.apply(coeffs, out);
  return out;
}

std::vector<double> adjoint_apply(std::span<const double> residual, const SamplingGrid& grid,
                                  const AcquisitionGeometry& geometry) {
  const KernelOperator op(geometry, grid);
  std::vector<double> out(op.cols());
  op.apply_adjoint(residual, out);
  return out;
}

// ---------------------------------------------------------------------------

CoefficientField cgnr_solve(const MeasurementSet& data, const SamplingGrid& grid, const Signal& sig,
                            const SolverOptions& opts) {
  data.validate();
  opts.validate();
  const KernelOperator op(AcquisitionGeometry{data.sensors, data.timegrid, sig, data.wave_speed}, grid,
                          opts.kernel_cache_bytes, opts.threads);
  return cgnr_solve(op, data.samples.data(), opts);
}

CoefficientField cgnr_solve(const KernelOperator& op, std::span<const double> rhs, const SolverOptions& opts) {
  opts.validate();
  if (rhs.size() != op.rows()) throw ValidationError("data length does not match the operator", "samples");
  for (double v : rhs)
    if (!std::isfinite(v)) throw ValidationError("non-finite sample", "samples");

  const std::size_t n = op.cols();
  const double alpha = opts.tikhonov;
  CoefficientField field{op.grid(), std::vector<double>(n, 0.0), {}};
  SolverReport& rep = field.report;
  rep.kernel_cached = op.cached();

  std::vector<double>& x = field.values;
  std::vector<double> r(rhs.begin(), rhs.end());
  std::vector<double> s(n);
  std::vector<double> q(op.rows());
  op.apply_adjoint(r, s);

  const double rhs_norm = std::sqrt(simd::dot(s, s));
  rep.residual_trace.push_back(std::sqrt(simd::dot(r, r)));
  if (rhs_norm == 0.0) {
    rep.zero_data = true;
    rep.converged = true;
    return field;
  }
  rep.normal_residual_trace.push_back(1.0);
  rep.relative_normal_residual = 1.0;

  std::vector<double> p = s;
  double gamma = simd::dot(s, s);
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    op.apply(p, q);
    const double delta = simd::dot(q, q) + alpha * simd::dot(p, p);
    if (!(delta > 0.0)) break;
    const double step = gamma / delta;
    simd::axpy(step, p, x);
    simd::axpy(-step, q, r);

    op.apply_adjoint(r, s);
    if (alpha > 0.0) simd::axpy(-alpha, x, s);
    const double gamma_next = simd::dot(s, s);

    rep.iterations = it;
    rep.relative_normal_residual = std::sqrt(gamma_next) / rhs_norm;
    rep.normal_residual_trace.push_back(rep.relative_normal_residual);
    rep.residual_trace.push_back(std::sqrt(simd::dot(r, r) + alpha * simd::dot(x, x)));
    if (!std::isfinite(rep.relative_normal_residual)) throw NumericalError("conjugate gradient diverged");
    if (rep.relative_normal_residual <= opts.tolerance) {
      rep.converged = true;
      break;
    }
    simd::xpby(s, gamma_next / gamma, p);
    gamma = gamma_next;
  }
  return field;
}

// ---------------------------------------------------------------------------

namespace {

/// Calls f(l) for every cell in the grid-clipped 3x3x3 block around `cell`.
template <typename F>
void for_each_neighbour(const SamplingGrid& grid, const GridIndex& cell, F&& f) {
  const GridIndex& res = grid.resolution();
  std::array<std::size_t, 3> lo{};
  std::array<std::size_t, 3> hi{};
  for (int a = 0; a < 3; ++a) {
    lo[a] = cell[a] == 0 ? 0 : cell[a] - 1;
    hi[a] = std::min(res[a] - 1, cell[a] + 1);
  }
  for (std::size_t i = lo[0]; i <= hi[0]; ++i)
    for (std::size_t j = lo[1]; j <= hi[1]; ++j)
      for (std::size_t k = lo[2]; k <= hi[2]; ++k) f(grid.index_of({i, j, k}));
}

}  // namespace

PeakReport extract_peaks(const CoefficientField& field, const SolverOptions& opts) {
  opts.validate();
  const SamplingGrid& grid = field.grid;
  if (field.values.size() != grid.size()) throw ValidationError("field length does not match grid");

  PeakReport report;
  if (!field.values.empty()) {
    const double vmax = *std::max_element(field.values.begin(), field.values.end());
    if (vmax > 0.0) {
      const double level = opts.isosurface_fraction * vmax;
      for (std::size_t l = 0; l < field.values.size(); ++l)
        if (field.values[l] >= level) report.isosurface_cells.push_back(l);
    }
  }

  std::vector<double> work = field.values;
  for (;;) {
    if (report.peaks.size() >= opts.max_peaks) {
      report.termination = PeakTermination::MaxCount;
      break;
    }
    // max_element returns the first maximum, i.e. the lowest index.
    const std::size_t best = static_cast<std::size_t>(std::max_element(work.begin(), work.end()) - work.begin());
    const GridIndex cell = grid.cell_of(best);
    double total = 0.0;
    for_each_neighbour(grid, cell, [&](std::size_t l) { total += work[l]; });
    if (total < opts.intensity_threshold) {
      report.termination = PeakTermination::Threshold;
      break;
    }
    report.peaks.push_back({cell, best, grid.point(cell), total});
    for_each_neighbour(grid, cell, [&](std::size_t l) { work[l] = 0.0; });
  }
  return report;
}

std::vector<std::size_t> local_maxima(const CoefficientField& field) {
  const SamplingGrid& grid = field.grid;
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < field.values.size(); ++l) {
    const double v = field.values[l];
    bool strict = true;
    for_each_neighbour(grid, grid.cell_of(l), [&](std::size_t m) {
      if (m != l && field.values[m] >= v) strict = false;
    });
    if (strict) out.push_back(l);
  }
  return out;
}

}  // namespace wavesrc
