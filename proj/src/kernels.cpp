#include "biot/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace biot::kernels {

namespace detail {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby_scalar(double a, const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double wdot_scalar(const double* w, const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * y[i];
  return s;
}

// Reference accumulation: pass over the history rows in blocks of four so
// the summation order matches the vector lanes' blocking.
void accumulate_scalar(double* dst, std::size_t n, const double* coeffs,
                       const double* const* vecs, std::size_t m) {
  std::size_t k = 0;
  for (; k + 4 <= m; k += 4) {
    const double c0 = coeffs[k], c1 = coeffs[k + 1], c2 = coeffs[k + 2], c3 = coeffs[k + 3];
    const double *v0 = vecs[k], *v1 = vecs[k + 1], *v2 = vecs[k + 2], *v3 = vecs[k + 3];
    for (std::size_t i = 0; i < n; ++i)
      dst[i] += c0 * v0[i] + c1 * v1[i] + c2 * v2[i] + c3 * v3[i];
  }
  for (; k < m; ++k) axpy_scalar(coeffs[k], vecs[k], dst, n);
}

#if defined(__x86_64__)
bool avx2_supported();
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
void axpby_avx2(double a, const double* x, double b, double* y, std::size_t n);
double dot_avx2(const double* x, const double* y, std::size_t n);
double wdot_avx2(const double* w, const double* x, const double* y, std::size_t n);
void accumulate_avx2(double* dst, std::size_t n, const double* coeffs,
                     const double* const* vecs, std::size_t m);
#endif
#if defined(__aarch64__)
void axpy_neon(double a, const double* x, double* y, std::size_t n);
void axpby_neon(double a, const double* x, double b, double* y, std::size_t n);
double dot_neon(const double* x, const double* y, std::size_t n);
double wdot_neon(const double* w, const double* x, const double* y, std::size_t n);
void accumulate_neon(double* dst, std::size_t n, const double* coeffs,
                     const double* const* vecs, std::size_t m);
#endif

}  // namespace detail

namespace {

struct KernelTable {
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*axpby)(double, const double*, double, double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*wdot)(const double*, const double*, const double*, std::size_t);
  void (*accumulate)(double*, std::size_t, const double*, const double* const*, std::size_t);
};

constexpr KernelTable kScalarTable = {
    detail::axpy_scalar, detail::axpby_scalar, detail::dot_scalar,
    detail::wdot_scalar, detail::accumulate_scalar};

#if defined(__x86_64__)
constexpr KernelTable kAvx2Table = {
    detail::axpy_avx2, detail::axpby_avx2, detail::dot_avx2,
    detail::wdot_avx2, detail::accumulate_avx2};
#endif
#if defined(__aarch64__)
constexpr KernelTable kNeonTable = {
    detail::axpy_neon, detail::axpby_neon, detail::dot_neon,
    detail::wdot_neon, detail::accumulate_neon};
#endif

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &kScalarTable;
    case Isa::avx2:
#if defined(__x86_64__)
      if (detail::avx2_supported()) return &kAvx2Table;
#endif
      return nullptr;
    case Isa::neon:
#if defined(__aarch64__)
      return &kNeonTable;
#endif
      return nullptr;
  }
  return nullptr;
}

Isa pick_default() {
  if (const char* env = std::getenv("BIOT_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && table_for(Isa::avx2)) return Isa::avx2;
    if (std::strcmp(env, "neon") == 0 && table_for(Isa::neon)) return Isa::neon;
  }
  if (table_for(Isa::avx2)) return Isa::avx2;
  if (table_for(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa g_isa = pick_default();
const KernelTable* g_table = table_for(g_isa);

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "?";
}

Isa active_isa() { return g_isa; }

bool isa_available(Isa isa) { return table_for(isa) != nullptr; }

void set_active_isa(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (!t) throw std::invalid_argument(std::string("SIMD lane unavailable: ") + isa_name(isa));
  g_isa = isa;
  g_table = t;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  g_table->axpy(a, x.data(), y.data(), y.size());
}

void axpby(double a, std::span<const double> x, double b, std::span<double> y) {
  g_table->axpby(a, x.data(), b, y.data(), y.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
  return g_table->dot(x.data(), y.data(), x.size());
}

double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y) {
  return g_table->wdot(w.data(), x.data(), y.data(), x.size());
}

void accumulate_scaled(std::span<double> dst, std::span<const double> coeffs,
                       const double* const* vecs) {
  g_table->accumulate(dst.data(), dst.size(), coeffs.data(), vecs, coeffs.size());
}

}  // namespace biot::kernels
