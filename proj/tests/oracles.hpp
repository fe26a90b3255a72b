#pragma once

// Independent numerical oracles used by the unit and acceptance suites.
// These deliberately avoid the library's closed forms: quadrature and
// eigensolves only.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "biot/material.hpp"

namespace oracles {

inline std::vector<double> z_sweep_re(double nu0) { return {nu0, 2 * nu0, 5 * nu0, 10 * nu0, 100 * nu0}; }

inline std::vector<double> z_sweep_im() {
  std::vector<double> im{0.0};
  for (int k = 0; k <= 18; ++k) {
    const double m = std::pow(10.0, -3.0 + 0.5 * k);
    im.push_back(m);
    im.push_back(-m);
  }
  return im;
}

// Smallest eigenvalue of sym Re(z M(z)) over the sampled z grid. Re(z M(z))
// depends on z only through Re z, so the imaginary sweep is a consistency
// check rather than a search direction.
inline double spectral_min_raw(const biot::MaterialLaw& law, double nu0) {
  double best = std::numeric_limits<double>::infinity();
  for (double nu : z_sweep_re(nu0)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(law.sym_re_z_m(nu),
                                                      Eigen::EigenvaluesOnly);
    best = std::min(best, es.eigenvalues().minCoeff());
  }
  return best;
}

// Same sweep over the symmetric-Gauss-reduced law. per_term=true gives the
// diagonal whose minimum is the closed-form positivity constant.
inline double spectral_min_reduced(const biot::MaterialLaw& law, double nu0, bool per_term) {
  double best = std::numeric_limits<double>::infinity();
  for (double nu : z_sweep_re(nu0)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(law.reduced_sym_re_z_m(nu, per_term),
                                                      Eigen::EigenvaluesOnly);
    best = std::min(best, es.eigenvalues().minCoeff());
  }
  return best;
}

// Positivity status of sym Re(z M(z)) at Re z = nu (a signature probe).
inline bool positive_definite_at(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}

// exp(M t) reference for the single-cell ODE checks.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& m) { return m.exp(); }

// Forward transform of a sampled causal kernel: integral_0^T k(t) e^{-iwt} dt
// by the composite trapezoidal rule.
inline std::complex<double> dft_of_kernel(const std::function<double(double)>& kernel,
                                          double t_end, double dt, double omega) {
  const int n = static_cast<int>(std::llround(t_end / dt));
  std::complex<double> acc = 0.0;
  for (int m = 0; m <= n; ++m) {
    const double t = m * dt;
    const double w = (m == 0 || m == n) ? 0.5 : 1.0;
    acc += w * kernel(t) * std::exp(std::complex<double>(0.0, -omega * t));
  }
  return acc * dt;
}

// A(0) recovered from frequency data only:
//   A(0) = (2/pi) * integral_0^inf Re A_hat(w) dw,
// evaluated with the substitution w = tan(theta) and the composite midpoint
// rule (the integrand stays bounded up to theta = pi/2).
inline double kernel_at_zero_from_frequency_data(
    const std::function<std::complex<double>(double)>& eval_hat) {
  const int panels = 1 << 20;
  const double h = (M_PI / 2.0) / panels;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double theta = (i + 0.5) * h;
    const double w = std::tan(theta);
    const double sec2 = 1.0 + w * w;
    acc += eval_hat(w).real() * sec2;
  }
  return acc * h * 2.0 / M_PI;
}

}  // namespace oracles
