// SPDX-License-Identifier: Apache-2.0
// AArch64 only; NEON is mandatory there so no runtime probe is needed.
#include <algorithm>
#include <arm_neon.h>

#include "datlas/simd/kernels.hpp"

namespace datlas::simd {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void gemv_t_neon(const double* a, std::size_t ld, std::size_t rows, std::size_t cols,
                 const double* x, double* y) {
  std::size_t c = 0;
  for (; c + 2 <= cols; c += 2) {
    const double* c0 = a + c * ld;
    const double* c1 = c0 + ld;
    float64x2_t s0 = vdupq_n_f64(0.0), s1 = vdupq_n_f64(0.0);
    std::size_t r = 0;
    for (; r + 2 <= rows; r += 2) {
      const float64x2_t vx = vld1q_f64(x + r);
      s0 = vfmaq_f64(s0, vld1q_f64(c0 + r), vx);
      s1 = vfmaq_f64(s1, vld1q_f64(c1 + r), vx);
    }
    double t0 = vaddvq_f64(s0), t1 = vaddvq_f64(s1);
    for (; r < rows; ++r) {
      t0 += c0[r] * x[r];
      t1 += c1[r] * x[r];
    }
    y[c] = t0;
    y[c + 1] = t1;
  }
  for (; c < cols; ++c) y[c] = dot_neon(a + c * ld, x, rows);
}

void gemv_n_neon_panel(const double* a, std::size_t ld, std::size_t rows, std::size_t cols,
                       const double* x, double* y) {
  std::size_t c = 0;
  for (; c + 2 <= cols; c += 2) {
    const double* c0 = a + c * ld;
    const double* c1 = c0 + ld;
    const float64x2_t x0 = vdupq_n_f64(x[c]), x1 = vdupq_n_f64(x[c + 1]);
    std::size_t r = 0;
    for (; r + 2 <= rows; r += 2) {
      float64x2_t acc = vld1q_f64(y + r);
      acc = vfmaq_f64(acc, vld1q_f64(c0 + r), x0);
      acc = vfmaq_f64(acc, vld1q_f64(c1 + r), x1);
      vst1q_f64(y + r, acc);
    }
    for (; r < rows; ++r) y[r] += c0[r] * x[c] + c1[r] * x[c + 1];
  }
  for (; c < cols; ++c) {
    if (x[c] != 0.0) axpy_neon(x[c], a + c * ld, y, rows);
  }
}

// Row panels keep the slice of y being accumulated resident in L1.
void gemv_n_neon(const double* a, std::size_t ld, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
  constexpr std::size_t kPanel = 512;
  for (std::size_t r0 = 0; r0 < rows; r0 += kPanel) {
    gemv_n_neon_panel(a + r0, ld, std::min(kPanel, rows - r0), cols, x, y + r0);
  }
}

double sqdist_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

}  // namespace

const KernelTable& neon_kernels() {
  static const KernelTable table{Isa::Neon, dot_neon,    axpy_neon,
                                 gemv_t_neon, gemv_n_neon, sqdist_neon};
  return table;
}

}  // namespace datlas::simd
