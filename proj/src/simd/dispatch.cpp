// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "datlas/simd/kernels.hpp"

namespace datlas::simd {
namespace {

bool cpu_has_avx2() {
#if defined(DATLAS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select_from_env() {
  const char* env = std::getenv("DATLAS_SIMD");
  const std::string want = env ? env : "auto";
  if (want == "scalar") return scalar_kernels();
  if (want == "avx2") return kernels_for(Isa::Avx2);
  if (want == "neon") return kernels_for(Isa::Neon);
  // auto: widest available
  return kernels_for(available_isas().back());
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::Scalar};
#if defined(DATLAS_HAVE_AVX2)
  if (cpu_has_avx2()) out.push_back(Isa::Avx2);
#endif
#if defined(DATLAS_HAVE_NEON)
  out.push_back(Isa::Neon);
#endif
  return out;
}

const KernelTable& kernels_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return scalar_kernels();
    case Isa::Avx2:
#if defined(DATLAS_HAVE_AVX2)
      if (cpu_has_avx2()) return avx2_kernels();
#endif
      break;
    case Isa::Neon:
#if defined(DATLAS_HAVE_NEON)
      return neon_kernels();
#endif
      break;
  }
  throw std::runtime_error("SIMD variant '" + std::string(isa_name(isa)) +
                           "' is not available on this machine");
}

const KernelTable& kernels() {
  static const KernelTable& active = select_from_env();
  return active;
}

}  // namespace datlas::simd
