// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "datlas/simd/kernels.hpp"

namespace datlas::simd {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void gemv_t_scalar(const double* a, std::size_t ld, std::size_t rows, std::size_t cols,
                   const double* x, double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = dot_scalar(a + c * ld, x, rows);
}

void gemv_n_scalar_panel(const double* a, std::size_t ld, std::size_t rows, std::size_t cols,
                         const double* x, double* y) {
  std::size_t c = 0;
  for (; c + 4 <= cols; c += 4) {
    const double* c0 = a + c * ld;
    const double* c1 = c0 + ld;
    const double* c2 = c1 + ld;
    const double* c3 = c2 + ld;
    for (std::size_t r = 0; r < rows; ++r) {
      y[r] += c0[r] * x[c] + c1[r] * x[c + 1] + c2[r] * x[c + 2] + c3[r] * x[c + 3];
    }
  }
  for (; c < cols; ++c) {
    if (x[c] != 0.0) axpy_scalar(x[c], a + c * ld, y, rows);
  }
}

// Row panels keep the slice of y being accumulated resident in L1.
void gemv_n_scalar(const double* a, std::size_t ld, std::size_t rows, std::size_t cols, const double* x,
                   double* y) {
  constexpr std::size_t kPanel = 512;
  for (std::size_t r0 = 0; r0 < rows; r0 += kPanel) {
    gemv_n_scalar_panel(a + r0, ld, std::min(kPanel, rows - r0), cols, x, y + r0);
  }
}

double sqdist_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::Scalar, dot_scalar,    axpy_scalar,
                                 gemv_t_scalar, gemv_n_scalar, sqdist_scalar};
  return table;
}

}  // namespace datlas::simd
