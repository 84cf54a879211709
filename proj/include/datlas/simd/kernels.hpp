// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dense double-precision inner loops used by the eigensolver, propagation,
// and k-means. Each kernel has a scalar reference version plus optional
// AVX2/FMA and NEON versions; the active table is picked once at runtime.
//
// Matrices are column-major with leading dimension `ld`.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace datlas::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y[c] = sum_r A[r + c*ld] * x[r]   for c in [0, cols)
  void (*gemv_t)(const double* a, std::size_t ld, std::size_t rows, std::size_t cols,
                 const double* x, double* y);
  // y[r] += sum_c A[r + c*ld] * x[c]  for r in [0, rows)
  void (*gemv_n)(const double* a, std::size_t ld, std::size_t rows, std::size_t cols,
                 const double* x, double* y);
  // sum_i (x[i] - y[i])^2
  double (*sqdist)(const double* x, const double* y, std::size_t n);
};

const KernelTable& scalar_kernels();
#if defined(DATLAS_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif
#if defined(DATLAS_HAVE_NEON)
const KernelTable& neon_kernels();
#endif

// ISAs compiled in and supported by the running CPU. Scalar is always first.
std::vector<Isa> available_isas();

// Table for a specific ISA; throws if it is not available on this machine.
const KernelTable& kernels_for(Isa isa);

// Active table. Honors DATLAS_SIMD=scalar|avx2|neon|auto on first call.
const KernelTable& kernels();

// Convenience wrappers over the active table.
inline double dot(std::span<const double> x, std::span<const double> y) {
  return kernels().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  kernels().axpy(a, x.data(), y.data(), x.size());
}
inline double sqdist(std::span<const double> x, std::span<const double> y) {
  return kernels().sqdist(x.data(), y.data(), x.size());
}

}  // namespace datlas::simd
