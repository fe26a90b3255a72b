#pragma once

#include <cstddef>
#include <span>

// Vectorized inner-loop kernels used by the time steppers and the
// convolution-quadrature oracle. Scalar reference implementations are
// always available; AVX2 (x86-64) and NEON (aarch64) variants are
// selected once at startup. The environment variable BIOT_SIMD
// (scalar|avx2|neon) overrides the automatic choice, which the
// equivalence tests use to compare lanes on the same host.

namespace biot::kernels {

enum class Isa { scalar, avx2, neon };

const char* isa_name(Isa isa);

// Lane chosen for this process (after env override).
Isa active_isa();

// True if the given lane can run on this CPU.
bool isa_available(Isa isa);

// Force a lane; throws std::invalid_argument if unavailable. Intended
// for tests and the --quiet diagnostics path, not concurrent use.
void set_active_isa(Isa isa);

// y += a*x
void axpy(double a, std::span<const double> x, std::span<double> y);

// y = a*x + b*y
void axpby(double a, std::span<const double> x, double b, std::span<double> y);

double dot(std::span<const double> x, std::span<const double> y);

// sum_i w[i]*x[i]*y[i]
double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y);

// dst[i] += sum_k coeff[k]*vecs[k][i]; the history-accumulation loop of
// the convolution oracle. vecs holds m row pointers of length dst.size().
void accumulate_scaled(std::span<double> dst, std::span<const double> coeffs,
                       const double* const* vecs);

}  // namespace biot::kernels
