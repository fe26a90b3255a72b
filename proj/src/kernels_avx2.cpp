#if defined(__x86_64__)

#include <immintrin.h>

#include <cstddef>

// AVX2/FMA lane. Compiled with -mavx2 -mfma in its own translation unit;
// callers must check avx2_supported() before dispatching here.

namespace biot::kernels::detail {

bool avx2_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

static inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, y0);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpby_avx2(double a, const double* x, double b, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    t = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), t);
    _mm256_storeu_pd(y + i, t);
  }
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double wdot_avx2(const double* w, const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xy = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), xy, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * x[i] * y[i];
  return s;
}

void accumulate_avx2(double* dst, std::size_t n, const double* coeffs,
                     const double* const* vecs, std::size_t m) {
  std::size_t k = 0;
  for (; k + 4 <= m; k += 4) {
    const __m256d c0 = _mm256_set1_pd(coeffs[k]);
    const __m256d c1 = _mm256_set1_pd(coeffs[k + 1]);
    const __m256d c2 = _mm256_set1_pd(coeffs[k + 2]);
    const __m256d c3 = _mm256_set1_pd(coeffs[k + 3]);
    const double *v0 = vecs[k], *v1 = vecs[k + 1], *v2 = vecs[k + 2], *v3 = vecs[k + 3];
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      __m256d acc = _mm256_loadu_pd(dst + i);
      acc = _mm256_fmadd_pd(c0, _mm256_loadu_pd(v0 + i), acc);
      acc = _mm256_fmadd_pd(c1, _mm256_loadu_pd(v1 + i), acc);
      acc = _mm256_fmadd_pd(c2, _mm256_loadu_pd(v2 + i), acc);
      acc = _mm256_fmadd_pd(c3, _mm256_loadu_pd(v3 + i), acc);
      _mm256_storeu_pd(dst + i, acc);
    }
    for (; i < n; ++i)
      dst[i] += coeffs[k] * v0[i] + coeffs[k + 1] * v1[i] + coeffs[k + 2] * v2[i] +
                coeffs[k + 3] * v3[i];
  }
  for (; k < m; ++k) axpy_avx2(coeffs[k], vecs[k], dst, n);
}

}  // namespace biot::kernels::detail

#endif  // __x86_64__
