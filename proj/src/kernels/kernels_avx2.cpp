#include <immintrin.h>

#include "fairtext/kernels.hpp"

namespace fairtext::kernels {

// Defined in dispatch.cpp when this translation unit is compiled in.
extern const KernelTable kAvx2Table;

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  if (i + 4 <= n) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double sum_squares_avx2(const double* x, std::size_t n) { return dot_avx2(x, x, n); }

void gemv_avx2(const double* rows, std::size_t n_rows, std::size_t cols, std::size_t stride,
               const double* v, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot_avx2(rows + r * stride, v, cols);
}

}  // namespace

const KernelTable kAvx2Table{Isa::Avx2, dot_avx2, axpy_avx2, sum_squares_avx2, gemv_avx2};

}  // namespace fairtext::kernels
