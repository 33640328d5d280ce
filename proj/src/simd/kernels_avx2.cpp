// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "insane/simd/kernels.hpp"

namespace insane::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_l2_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void squared_l2_rows_avx2(const double* query, const double* rows, std::size_t n_rows,
                          std::size_t dim, std::size_t stride, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = squared_l2_avx2(query, rows + r * stride, dim);
}

double shoelace2_avx2(const double* x, const double* y, std::size_t n) {
  if (n < 3) return 0.0;
  const __m256d x0 = _mm256_set1_pd(x[0]);
  const __m256d y0 = _mm256_set1_pd(y[0]);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 1;
  for (; i + 4 < n; i += 4) {
    const __m256d xi = _mm256_sub_pd(_mm256_loadu_pd(x + i), x0);
    const __m256d yi = _mm256_sub_pd(_mm256_loadu_pd(y + i), y0);
    const __m256d xn = _mm256_sub_pd(_mm256_loadu_pd(x + i + 1), x0);
    const __m256d yn = _mm256_sub_pd(_mm256_loadu_pd(y + i + 1), y0);
    acc = _mm256_add_pd(acc, _mm256_fmsub_pd(xi, yn, _mm256_mul_pd(xn, yi)));
  }
  double s = hsum(acc);
  for (; i + 1 < n; ++i) {
    s += (x[i] - x[0]) * (y[i + 1] - y[0]) - (x[i + 1] - x[0]) * (y[i] - y[0]);
  }
  return s;
}

}  // namespace

extern const KernelTable kAvx2Kernels;
const KernelTable kAvx2Kernels{Isa::Avx2, dot_avx2, squared_l2_avx2, squared_l2_rows_avx2,
                               shoelace2_avx2};

}  // namespace insane::simd
