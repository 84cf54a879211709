// SPDX-License-Identifier: Apache-2.0
// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <algorithm>
#include <immintrin.h>

#include "datlas/simd/kernels.hpp"

namespace datlas::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

// Four columns per sweep so x is streamed once per block.
void gemv_t_avx2(const double* a, std::size_t ld, std::size_t rows, std::size_t cols,
                 const double* x, double* y) {
  std::size_t c = 0;
  for (; c + 4 <= cols; c += 4) {
    const double* c0 = a + c * ld;
    const double* c1 = c0 + ld;
    const double* c2 = c1 + ld;
    const double* c3 = c2 + ld;
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
    std::size_t r = 0;
    for (; r + 4 <= rows; r += 4) {
      const __m256d vx = _mm256_loadu_pd(x + r);
      s0 = _mm256_fmadd_pd(_mm256_loadu_pd(c0 + r), vx, s0);
      s1 = _mm256_fmadd_pd(_mm256_loadu_pd(c1 + r), vx, s1);
      s2 = _mm256_fmadd_pd(_mm256_loadu_pd(c2 + r), vx, s2);
      s3 = _mm256_fmadd_pd(_mm256_loadu_pd(c3 + r), vx, s3);
    }
    double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
    for (; r < rows; ++r) {
      t0 += c0[r] * x[r];
      t1 += c1[r] * x[r];
      t2 += c2[r] * x[r];
      t3 += c3[r] * x[r];
    }
    y[c] = t0;
    y[c + 1] = t1;
    y[c + 2] = t2;
    y[c + 3] = t3;
  }
  for (; c < cols; ++c) y[c] = dot_avx2(a + c * ld, x, rows);
}

void gemv_n_avx2_panel(const double* a, std::size_t ld, std::size_t rows, std::size_t cols,
                       const double* x, double* y) {
  std::size_t c = 0;
  for (; c + 4 <= cols; c += 4) {
    const double* c0 = a + c * ld;
    const double* c1 = c0 + ld;
    const double* c2 = c1 + ld;
    const double* c3 = c2 + ld;
    const __m256d x0 = _mm256_set1_pd(x[c]), x1 = _mm256_set1_pd(x[c + 1]);
    const __m256d x2 = _mm256_set1_pd(x[c + 2]), x3 = _mm256_set1_pd(x[c + 3]);
    std::size_t r = 0;
    for (; r + 4 <= rows; r += 4) {
      __m256d acc = _mm256_loadu_pd(y + r);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(c0 + r), x0, acc);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(c1 + r), x1, acc);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(c2 + r), x2, acc);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(c3 + r), x3, acc);
      _mm256_storeu_pd(y + r, acc);
    }
    for (; r < rows; ++r) {
      y[r] += c0[r] * x[c] + c1[r] * x[c + 1] + c2[r] * x[c + 2] + c3[r] * x[c + 3];
    }
  }
  for (; c < cols; ++c) {
    if (x[c] != 0.0) axpy_avx2(x[c], a + c * ld, y, rows);
  }
}

// Row panels keep the slice of y being accumulated resident in L1.
void gemv_n_avx2(const double* a, std::size_t ld, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
  constexpr std::size_t kPanel = 512;
  for (std::size_t r0 = 0; r0 < rows; r0 += kPanel) {
    gemv_n_avx2_panel(a + r0, ld, std::min(kPanel, rows - r0), cols, x, y + r0);
  }
}

double sqdist_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{Isa::Avx2, dot_avx2,    axpy_avx2,
                                 gemv_t_avx2, gemv_n_avx2, sqdist_avx2};
  return table;
}

}  // namespace datlas::simd
