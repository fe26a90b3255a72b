#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "biot/grid.hpp"
#include "biot/material.hpp"
#include "biot/operators.hpp"

namespace biot {

class SolverError : public std::runtime_error {
 public:
  enum class Code { singular_system, linear_solve_failed, stability_breach, resolution };
  SolverError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

// Offsets of the state blocks U = (v, sigma, p, psi_1..psi_N) in one flat
// vector over the grid.
struct StateLayout {
  int nv = 0, nsigma = 0, np = 0, npsi = 0, n_terms = 0;
  int v_off = 0, sigma_off = 0, p_off = 0, psi_base = 0;
  int total = 0;

  static StateLayout make(const Grid& grid, int n_terms);
  int psi_off(int j) const { return psi_base + j * npsi; }

  Eigen::VectorBlock<Eigen::VectorXd> v(Eigen::VectorXd& u) const {
    return u.segment(v_off, nv);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> v(const Eigen::VectorXd& u) const {
    return u.segment(v_off, nv);
  }
  Eigen::VectorBlock<Eigen::VectorXd> sigma(Eigen::VectorXd& u) const {
    return u.segment(sigma_off, nsigma);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> sigma(const Eigen::VectorXd& u) const {
    return u.segment(sigma_off, nsigma);
  }
  Eigen::VectorBlock<Eigen::VectorXd> p(Eigen::VectorXd& u) const {
    return u.segment(p_off, np);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> p(const Eigen::VectorXd& u) const {
    return u.segment(p_off, np);
  }
  Eigen::VectorBlock<Eigen::VectorXd> psi(Eigen::VectorXd& u, int j) const {
    return u.segment(psi_off(j), npsi);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> psi(const Eigen::VectorXd& u, int j) const {
    return u.segment(psi_off(j), npsi);
  }

  // Mass weights for the full layout, the inner product all energy and
  // norm computations use.
  Eigen::VectorXd weights(const DiscreteOps& ops) const;
};

// Component of the body force at a dof position; axis selects the vector
// component in 2-d.
using BodyForce = std::function<double(int axis, double x, double y, double t)>;

struct Forcing {
  // Writes G(t) into a preallocated full-layout vector.
  std::function<void(double t, Eigen::VectorXd& g)> eval;
  bool is_zero = false;

  static Forcing none();
  // Physical right-hand side (rho f, 0, 0, rho_f f): the body force enters
  // the velocity rows and every auxiliary row.
  static Forcing from_body_force(const MaterialLaw& law, const Grid& grid,
                                 const StateLayout& layout, BodyForce f);
};

struct SolverConfig {
  double dt = 0.0;
  double t_end = 0.0;
  double theta = 1.0;
  double linear_tol = 1e-9;
  // Initial data; empty vectors mean zero. sigma(0) is derived from u0 as
  // C Grad0 u0 unless sigma0 is given directly; psi(0) defaults to zero
  // (empty convolution history).
  Eigen::VectorXd u0, v0, p0, sigma0;
  std::vector<Eigen::VectorXd> psi0;

  void validate() const;
};

struct Probe {
  enum class Kind { point, norm, energy };
  Kind kind = Kind::energy;
  std::string field;  // v, sigma, p, psi<j>, u
  int index = 0;
  std::string name() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::string> probe_names;
  std::vector<std::vector<double>> rows;
  // Snapshots for solver-to-solver comparison, filled on request.
  std::vector<Eigen::VectorXd> u_history, p_history;
  Eigen::VectorXd final_state;
  Eigen::VectorXd final_u;

  void write_csv(std::ostream& out) const;
};

// theta-discretization of (d_t M0 + M1 + A) U = G:
//   L+ U_{n+1} = L- U_n + theta G_{n+1} + (1-theta) G_n,
//   L+ = M0/dt + theta (M1+A), L- = M0/dt - (1-theta) (M1+A).
class SteppingOperator {
 public:
  SteppingOperator(SpMat m0, SpMat m1, SpMat a, Eigen::VectorXd weights, double dt,
                   double theta, double linear_tol = 1e-9);

  static SteppingOperator assemble(const MaterialLaw& law, const DiscreteOps& ops,
                                   const Grid& grid, const SolverConfig& cfg);

  void step(Eigen::VectorXd& u, const Eigen::VectorXd& g_n,
            const Eigen::VectorXd& g_np1) const;

  // E = 1/2 <M0 U, U>_W.
  double energy(const Eigen::VectorXd& u) const;
  double weighted_norm(const Eigen::VectorXd& u) const;

  const SpMat& m0() const { return m0_; }
  const SpMat& m1() const { return m1_; }
  const SpMat& a_op() const { return a_; }
  const Eigen::VectorXd& weights() const { return w_; }
  double dt() const { return dt_; }
  double theta() const { return theta_; }

 private:
  SpMat m0_, m1_, a_, l_plus_, l_minus_;
  Eigen::VectorXd w_;
  double dt_, theta_, linear_tol_;
  Eigen::SparseLU<SpMat> lu_;
};

// Global sparse blocks of the evolutionary system on the grid.
struct SystemBlocks {
  SpMat m0, m1, a;
};
SystemBlocks build_system_blocks(const MaterialLaw& law, const DiscreteOps& ops,
                                 const Grid& grid);

// Initial state (v0, C Grad0 u0, p0, psi0) assembled into one vector.
Eigen::VectorXd initial_state(const MaterialLaw& law, const DiscreteOps& ops,
                              const Grid& grid, const StateLayout& layout,
                              const SolverConfig& cfg);

// Stiffness applied pointwise to a sigma-layout strain vector.
Eigen::VectorXd apply_stiffness(const MaterialLaw& law, const Grid& grid,
                                const Eigen::VectorXd& eps);

struct RunOptions {
  bool record_u = false;
  bool record_p = false;
};

// Iterates the theta step over [0, T] from the given initial state (zero
// when empty), recording one probe row per step. u(t) is accumulated from
// v by the trapezoidal rule when requested by a probe or by record_u.
Trajectory run(const SteppingOperator& stepper, const StateLayout& layout,
               const DiscreteOps& ops, const SolverConfig& cfg, const Forcing& forcing,
               std::span<const Probe> probes, Eigen::VectorXd initial,
               const RunOptions& opt = {});

// theta-integration of one auxiliary equation c psi' + psi = pref*d*g(t),
// psi(0) = psi0; returns psi at t_1..t_steps.
std::vector<double> integrate_single_ade(double c, double d_weight, double prefactor,
                                         double theta, double dt, int steps,
                                         const std::function<double(double)>& g,
                                         double psi0 = 0.0);

// Steady-state complex amplitude of sum_j psi_j when the standalone ADE
// system is driven by g(t)=sin(omega t), measured by least squares after
// the transient has decayed. omega must satisfy omega*dt <= 0.1.
std::complex<double> measure_ade_transfer(const PermeabilitySeries& series, double omega,
                                          double theta, double dt);

}  // namespace biot
