#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "biot/grid.hpp"
#include "biot/material.hpp"
#include "biot/operators.hpp"
#include "biot/system.hpp"

namespace biot {

// Manufactured solution: closed-form fields plus the residual sources
// obtained by substituting them into the coupled system. The sources act
// on every equation, which is a test-only extension: the physical system
// carries a body force in the velocity and auxiliary rows only.
struct MmsCase {
  std::string name;
  int d = 1;
  std::function<double(int axis, double x, double y, double t)> v_exact;
  std::function<double(int comp, double x, double y, double t)> sigma_exact;
  std::function<double(double x, double y, double t)> p_exact;
  std::function<double(int j, int axis, double x, double y, double t)> psi_exact;
  std::function<double(int axis, double x, double y, double t)> src_v;
  std::function<double(int comp, double x, double y, double t)> src_sigma;
  std::function<double(double x, double y, double t)> src_p;
  std::function<double(int j, int axis, double x, double y, double t)> src_psi;
};

// Smooth separable trigonometric fields; v and p vanish on the boundary,
// sigma and psi do not (they exercise the natural conditions).
MmsCase make_trig_case(const MaterialLaw& law, int d, double lx, double ly);

// Static fields with balancing sources; the scheme reproduces them to
// machine precision.
MmsCase make_constant_case(const MaterialLaw& law, int d);

MmsCase make_mms_case(const std::string& name, const MaterialLaw& law, int d, double lx,
                      double ly);

// Exact state sampled on the grid dofs at time t.
Eigen::VectorXd sample_exact_state(const MmsCase& mms, const Grid& grid,
                                   const StateLayout& layout, double t);

Forcing mms_forcing(const MmsCase& mms, const Grid& grid, const StateLayout& layout);

// Relative mass-weighted L2 error over all state blocks.
double mms_error(const MmsCase& mms, const Grid& grid, const StateLayout& layout,
                 const DiscreteOps& ops, const Eigen::VectorXd& state, double t);

enum class RefineMode { space_time, time_only, space_only };

struct MmsStudyConfig {
  std::string case_name = "trig";
  int d = 1;
  std::vector<int> cells;  // per level; levels must refine by factor 2
  double extent = 1.0;
  double dt0 = 0.0;  // coarsest step
  double t_end = 0.5;
  double theta = 0.5;
  RefineMode mode = RefineMode::space_time;
};

struct ConvergenceRow {
  int level = 0;
  int cells = 0;
  double h = 0.0;
  double dt = 0.0;
  double error = 0.0;
  double order = 0.0;  // from the previous level; 0 on the first row
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double observed_order() const;  // mean of the per-pair orders
  void write_csv(std::ostream& out) const;
};

ConvergenceTable mms_study(const MaterialParams& params, const PermeabilitySeries& series,
                           const MmsStudyConfig& cfg);

}  // namespace biot
