#if defined(__aarch64__)

#include <arm_neon.h>

#include <cstddef>

// NEON lane (always present on aarch64).

namespace biot::kernels::detail {

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    vst1q_f64(y + i + 2, vfmaq_f64(vld1q_f64(y + i + 2), va, vld1q_f64(x + i + 2)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpby_neon(double a, const double* x, double b, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t vb = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t t = vmulq_f64(vb, vld1q_f64(y + i));
    vst1q_f64(y + i, vfmaq_f64(t, va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

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

double wdot_neon(const double* w, const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t xy = vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    acc = vfmaq_f64(acc, vld1q_f64(w + i), xy);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += w[i] * x[i] * y[i];
  return s;
}

void accumulate_neon(double* dst, std::size_t n, const double* coeffs,
                     const double* const* vecs, std::size_t m) {
  std::size_t k = 0;
  for (; k + 4 <= m; k += 4) {
    const float64x2_t c0 = vdupq_n_f64(coeffs[k]);
    const float64x2_t c1 = vdupq_n_f64(coeffs[k + 1]);
    const float64x2_t c2 = vdupq_n_f64(coeffs[k + 2]);
    const float64x2_t c3 = vdupq_n_f64(coeffs[k + 3]);
    const double *v0 = vecs[k], *v1 = vecs[k + 1], *v2 = vecs[k + 2], *v3 = vecs[k + 3];
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
      float64x2_t acc = vld1q_f64(dst + i);
      acc = vfmaq_f64(acc, c0, vld1q_f64(v0 + i));
      acc = vfmaq_f64(acc, c1, vld1q_f64(v1 + i));
      acc = vfmaq_f64(acc, c2, vld1q_f64(v2 + i));
      acc = vfmaq_f64(acc, c3, vld1q_f64(v3 + i));
      vst1q_f64(dst + i, acc);
    }
    for (; i < n; ++i)
      dst[i] += coeffs[k] * v0[i] + coeffs[k + 1] * v1[i] + coeffs[k + 2] * v2[i] +
                coeffs[k + 3] * v3[i];
  }
  for (; k < m; ++k) axpy_neon(coeffs[k], vecs[k], dst, n);
}

}  // namespace biot::kernels::detail

#endif  // __aarch64__
