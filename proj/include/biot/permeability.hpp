#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace biot {

// One relaxation term of the rational permeability series: weight d over
// the pole at -1/c, i.e. the frequency response d/(1 + i*omega*c).
struct PermeabilityTerm {
  double c = 0.0;  // relaxation time [s]
  double d = 0.0;  // dimensionless weight
};

// Rational dynamic permeability
//   A_hat(omega) = (eta_k/F) * sum_j d_j / (1 + i*omega*c_j)
// with kinematic viscosity eta_k = eta/rho_f and formation factor
// F = alpha_inf/phi. Immutable after construction; terms are kept sorted
// by ascending relaxation time so fitted series compare order-free.
class PermeabilitySeries {
 public:
  PermeabilitySeries(double eta_k, double formation_factor,
                     std::vector<PermeabilityTerm> terms);

  double eta_k() const { return eta_k_; }
  double formation_factor() const { return formation_factor_; }
  // eta_k/F, the prefactor shared by every term.
  double prefactor() const { return eta_k_ / formation_factor_; }
  std::span<const PermeabilityTerm> terms() const { return terms_; }
  int size() const { return static_cast<int>(terms_.size()); }

  // Frequency response at real angular frequency omega.
  std::complex<double> eval_hat(double omega) const;

  // Response continued to the complex Laplace variable z = nu + i*m:
  // (eta_k/F) sum d_j/(1 + z*c_j). eval_hat(w) == eval_laplace(i*w).
  std::complex<double> eval_laplace(std::complex<double> z) const;

  // Causal time-domain kernel A(t) = (eta_k/F) sum (d_j/c_j) e^{-t/c_j},
  // t >= 0. Throws std::domain_error for t < 0.
  double kernel(double t) const;

  // Closed form of (A * 1)(t) = (eta_k/F) sum d_j (1 - e^{-t/c_j}).
  double step_response(double t) const;

  nlohmann::json to_json() const;
  static PermeabilitySeries from_json(const nlohmann::json& j);

 private:
  double eta_k_;
  double formation_factor_;
  std::vector<PermeabilityTerm> terms_;
};

struct FrequencySample {
  double omega = 0.0;
  std::complex<double> value;
};

// CSV with header "omega,re,im", one sample per row.
std::vector<FrequencySample> read_samples_csv(std::istream& in);
void write_samples_csv(std::ostream& out, std::span<const FrequencySample> samples);

struct FitOptions {
  int max_iterations = 60;
  double pole_tolerance = 1e-12;      // relative pole movement that ends the iteration
  std::optional<double> static_limit; // pin eval_hat(0) to this value
  // Principal viscous relaxation time bound c_j < Phi; only a warning is
  // emitted when violated since no numeric value is established for it.
  std::optional<double> relaxation_time_bound;
  double eta_k = 1.0;
  double formation_factor = 1.0;
};

struct FitResult {
  PermeabilitySeries series;
  double residual = 0.0;  // relative rms misfit over the samples
  int iterations = 0;
  std::vector<std::string> warnings;
};

class FitError : public std::runtime_error {
 public:
  enum class Code { insufficient_samples, diverged, positivity_violated };
  FitError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

// Pole-relocation least-squares fit (vector-fitting style): poles fixed,
// weights from a linear solve, poles moved to the zeros of the scaling
// function, iterated to convergence. Requires samples.size() >= 2*n_terms
// with distinct frequencies.
FitResult fit_series(std::span<const FrequencySample> samples, int n_terms,
                     const FitOptions& options = {});

}  // namespace biot
