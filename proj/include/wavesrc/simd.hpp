#pragma once

// Dense inner loops behind the least-squares solver and the indicator scan.
//
// Each routine has a scalar reference implementation and vector variants
// (AVX2 on x86-64, NEON on AArch64). The variant is picked once at startup
// from the CPU's capabilities and can be pinned with set_isa() or the
// WAVESRC_ISA environment variable ("scalar", "avx2", "neon").
//
// Element-wise routines (axpy, xpby) are bitwise identical across variants.
// Reductions (dot, sum_sq_diff) reassociate and agree to rounding only.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace wavesrc::simd {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y = x + beta * y
  void (*xpby)(const double* x, double beta, double* y, std::size_t n);
  /// sum (a - b)^2
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
};

/// Variants compiled into this binary and supported by the running CPU.
std::vector<Isa> available_isas();
bool is_available(Isa isa);

const KernelTable& kernels(Isa isa);
const KernelTable& active();
/// Throws std::invalid_argument if `isa` is not available.
void set_isa(Isa isa);

const char* to_string(Isa isa);
Isa isa_from_string(const std::string& name);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), y.size());
}
inline void xpby(std::span<const double> x, double beta, std::span<double> y) {
  active().xpby(x.data(), beta, y.data(), y.size());
}
inline double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  return active().sum_sq_diff(a.data(), b.data(), a.size());
}

namespace detail {
extern const KernelTable kScalarTable;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kAvx2Table;
#endif
#if defined(__aarch64__)
extern const KernelTable kNeonTable;
#endif
}  // namespace detail

}  // namespace wavesrc::simd
