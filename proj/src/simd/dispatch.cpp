#include <atomic>
#include <cstdlib>
#include <stdexcept>

#include "wavesrc/simd.hpp"

namespace wavesrc::simd {

namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return &detail::kScalarTable;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return &detail::kAvx2Table;
#else
      return nullptr;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return &detail::kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable* pick_default() {
  if (const char* env = std::getenv("WAVESRC_ISA")) {
    // Unknown or unsupported names fall back to automatic selection.
    try {
      const Isa want = isa_from_string(env);
      if (is_available(want)) return table_for(want);
    } catch (const std::invalid_argument&) {
    }
  }
  for (Isa isa : {Isa::Avx2, Isa::Neon})
    if (is_available(isa)) return table_for(isa);
  return &detail::kScalarTable;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

bool is_available(Isa isa) { return table_for(isa) != nullptr && cpu_supports(isa); }

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
    if (is_available(isa)) out.push_back(isa);
  return out;
}

const KernelTable& kernels(Isa isa) {
  if (!is_available(isa)) throw std::invalid_argument(std::string("ISA not available: ") + to_string(isa));
  return *table_for(isa);
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) { current().store(&kernels(isa), std::memory_order_relaxed); }

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "scalar";
}

Isa isa_from_string(const std::string& name) {
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  if (name == "neon") return Isa::Neon;
  throw std::invalid_argument("unknown ISA '" + name + "'");
}

}  // namespace wavesrc::simd
