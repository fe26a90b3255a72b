#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "biot/grid.hpp"
#include "biot/material.hpp"
#include "biot/operators.hpp"
#include "biot/system.hpp"

namespace biot {

// Stored history of the convolution operand g(t_m) together with the
// composite trapezoidal quadrature of the memory integral. Grows linearly
// with the step count; every evaluation is O(history).
class HistoryBuffer {
 public:
  explicit HistoryBuffer(int dofs) : dofs_(dofs) {}

  void push(Eigen::VectorXd g);
  int size() const { return static_cast<int>(samples_.size()); }
  const Eigen::VectorXd& sample(int m) const { return samples_[m]; }

  // (A*g)(t_n) with t_n = (size()-1)*dt; kernel_table[m] = A(m*dt).
  Eigen::VectorXd conv_eval(std::span<const double> kernel_table, double dt) const;

  // Quadrature of (A*g)(t_{n+1}) over the stored samples 0..n only, i.e.
  // everything except the closing term (dt/2) A(0) g_{n+1}.
  Eigen::VectorXd conv_partial_next(std::span<const double> kernel_table, double dt) const;

 private:
  int dofs_;
  std::vector<Eigen::VectorXd> samples_;
  std::vector<const double*> ptrs_;
};

struct ConvolutionConfig {
  double dt = 0.0;
  double t_end = 0.0;
  double theta = 0.5;               // weighting of the memory term in the p update
  double blowup_threshold = 1e12;   // StabilityBreach guard on |u|_inf, |p|_inf
  Eigen::VectorXd u0, v0, p0;
};

// Reference solver for the convolution form: u stepped by explicit
// second-order central differences, p theta-implicitly, the memory term
// evaluated by trapezoidal quadrature over the stored operand history
// with the acceleration entering the operand lagged by one step.
Trajectory run_convolution(const MaterialLaw& law, const DiscreteOps& ops, const Grid& grid,
                           const ConvolutionConfig& cfg, const BodyForce& f,
                           std::span<const Probe> probes, const RunOptions& opt = {});

}  // namespace biot
