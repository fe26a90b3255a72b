#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "biot/permeability.hpp"

namespace biot {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct IsotropicElasticity {
  double lambda = 0.0;  // first Lame parameter [Pa]
  double mu = 0.0;      // shear modulus [Pa]
};

// Stiffness acting on symmetric tensors, given as the Kelvin-form matrix
// (off-diagonal pairs scaled by sqrt(2)), so that matrix eigenvalues equal
// the eigenvalues of the fourth-order tensor.
struct KelvinElasticity {
  Eigen::MatrixXd stiffness;
};

using Elasticity = std::variant<IsotropicElasticity, KelvinElasticity>;

struct MaterialParams {
  double rho_s = 0.0;      // solid density [kg/m^3]
  double rho_f = 0.0;      // fluid density [kg/m^3]
  double phi = 0.0;        // porosity
  double alpha = 0.0;      // Biot coefficient
  double c0 = 0.0;         // specific storage [1/Pa]
  double eta = 0.0;        // dynamic viscosity [Pa s]
  double alpha_inf = 1.0;  // infinite-frequency tortuosity
  Elasticity elasticity;

  void validate() const;  // throws std::invalid_argument

  double rho() const { return rho_f * phi + rho_s * (1.0 - phi); }
  double eta_k() const { return eta / rho_f; }
  double formation_factor() const { return alpha_inf / phi; }

  // Derives eta_k and F from the physical parameters.
  PermeabilitySeries make_series(std::vector<PermeabilityTerm> terms) const;

  // Stiffness/compliance in Kelvin coordinates for dimension d; size
  // d(d+1)/2. Throws DimensionMismatch if a tensor input does not match d.
  Eigen::MatrixXd stiffness_kelvin(int d) const;
  Eigen::MatrixXd compliance_kelvin(int d) const;

  // Stiffness/compliance on stored components (tensor shear convention,
  // off-diagonals stored once), the basis the grid fields use.
  Eigen::MatrixXd stiffness_storage(int d) const;
  Eigen::MatrixXd compliance_storage(int d) const;

  // c_s: smallest eigenvalue of the compliance; closed form when isotropic.
  double compliance_min_eigenvalue(int d) const;

  static MaterialParams from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Per-point blocks of the material law M(z) = M0 + z^{-1} M1 for the state
// (v, sigma, p, psi_1..psi_N). Sigma is kept in Kelvin coordinates here so
// the blocks are plain-symmetric and matrix eigenvalues are operator
// eigenvalues.
class MaterialLaw {
 public:
  MaterialLaw(const MaterialParams& params, const PermeabilitySeries& series, int d);
  // Memory-free law (no auxiliary fields), the plain dynamic Biot limit.
  MaterialLaw(const MaterialParams& params, int d);

  int dim() const { return d_; }
  int n_terms() const { return n_; }
  int sigma_components() const { return d_ * (d_ + 1) / 2; }
  int block_size() const { return d_ + sigma_components() + 1 + n_ * d_; }

  const Eigen::MatrixXd& m0() const { return m0_; }
  const Eigen::MatrixXd& m1() const { return m1_; }

  // nu*M0 + M1 == sym Re(z M(z)) for any z with Re z = nu.
  Eigen::MatrixXd sym_re_z_m(double nu) const;

  // Block-diagonal form after the symmetric Gauss step that eliminates the
  // v/psi coupling, evaluated as sym Re(z M_reduced(z)).
  // per_term=true reproduces the per-term diagonal whose minimum is the
  // closed-form positivity constant; per_term=false keeps the exact
  // congruent psi block (rank-one coupling correction), which preserves
  // the signature of the unreduced law.
  Eigen::MatrixXd reduced_sym_re_z_m(double nu, bool per_term) const;

  bool m0_positive_definite() const;
  // rho - sum_j d_j*eta/(c_j*F): M0 is positive definite iff this is > 0.
  double m0_schur_margin() const;

  double rho() const { return rho_; }
  double rho_f() const { return rho_f_; }
  double c0() const { return c0_; }
  double alpha() const { return alpha_; }
  double compliance_min_eigenvalue() const { return c_s_; }
  // psi-block coefficients of M0 and M1: a_j = c_j rho_f F/(d_j eta_k),
  // b_j = rho_f F/(d_j eta_k).
  double a(int j) const { return a_[j]; }
  double b(int j) const { return b_[j]; }
  const Eigen::MatrixXd& compliance_storage() const { return s_storage_; }
  const Eigen::MatrixXd& stiffness_storage() const { return c_storage_; }

  const std::optional<PermeabilitySeries>& series() const { return series_; }

 private:
  void build_blocks(const MaterialParams& params);

  int d_;
  int n_;
  double rho_, rho_f_, c0_, c_s_, eta_, alpha_;
  std::vector<double> a_, b_;
  Eigen::MatrixXd s_kelvin_, s_storage_, c_storage_;
  Eigen::MatrixXd m0_, m1_;
  std::optional<PermeabilitySeries> series_;
};

MaterialLaw assemble_material_law(const MaterialParams& params,
                                  const PermeabilitySeries& series, int d);

struct WellPosednessReport {
  double nu0 = 0.0;
  bool holds = false;
  double c_min = 0.0;
  // nu0*(c_j F/(d_j eta) - 1/rho) + F/(d_j eta) per term.
  std::vector<double> per_term_margins;
  // Interval of nu0 for which every margin is positive; hi is +inf when
  // every slope is nonnegative.
  double nu0_range_lo = 0.0;
  double nu0_range_hi = 0.0;
  bool nu0_range_unbounded = false;
  // Optional diagnostic margin for the convolution-form material law:
  // inf_m Re(1/A_hat_L(nu0 + i m)) - nu0 rho_f/rho.
  std::optional<double> convolution_form_margin;

  nlohmann::json to_json() const;
  void print_table(std::ostream& out) const;
};

// Closed-form positivity constant
//   min{nu0 rho, nu0 c_s, nu0 c0,
//       min_j rho_f^2 (nu0 (c_j F/(d_j eta) - 1/rho) + F/(d_j eta))}.
double c_min(const MaterialLaw& law, const MaterialParams& params, double nu0);

WellPosednessReport check_wellposedness(const MaterialParams& params,
                                        const PermeabilitySeries& series, double nu0, int d = 1,
                                        bool convolution_diagnostic = false);

}  // namespace biot
