#include "biot/conv_oracle.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>

#include "biot/kernels.hpp"
#include "biot/num_io.hpp"

namespace biot {

void HistoryBuffer::push(Eigen::VectorXd g) {
  if (g.size() != dofs_) throw std::invalid_argument("history: operand has wrong size");
  samples_.push_back(std::move(g));
  ptrs_.push_back(samples_.back().data());
}

Eigen::VectorXd HistoryBuffer::conv_eval(std::span<const double> kernel_table,
                                         double dt) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs_);
  const int n = size() - 1;
  if (n < 1) return out;  // empty integration interval
  std::vector<double> coeffs(n + 1);
  for (int m = 0; m <= n; ++m) {
    const double w = (m == 0 || m == n) ? 0.5 : 1.0;
    coeffs[m] = dt * w * kernel_table[n - m];
  }
  kernels::accumulate_scaled({out.data(), static_cast<std::size_t>(out.size())}, coeffs,
                             ptrs_.data());
  return out;
}

Eigen::VectorXd HistoryBuffer::conv_partial_next(std::span<const double> kernel_table,
                                                 double dt) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs_);
  const int n = size() - 1;
  if (n < 0) return out;
  std::vector<double> coeffs(n + 1);
  for (int m = 0; m <= n; ++m) {
    const double w = (m == 0) ? 0.5 : 1.0;
    coeffs[m] = dt * w * kernel_table[n + 1 - m];
  }
  kernels::accumulate_scaled({out.data(), static_cast<std::size_t>(out.size())}, coeffs,
                             ptrs_.data());
  return out;
}

namespace {

double probe_conv(const Probe& probe, const Eigen::VectorXd& u, const Eigen::VectorXd& p,
                  const DiscreteOps& ops) {
  const Eigen::VectorXd* values = nullptr;
  const Eigen::VectorXd* weights = nullptr;
  if (probe.field == "u") {
    values = &u;
    weights = &ops.wv;
  } else if (probe.field == "p") {
    values = &p;
    weights = &ops.wc;
  } else {
    throw std::invalid_argument("convolution probes support fields u and p only");
  }
  if (probe.kind == Probe::Kind::norm)
    return std::sqrt(kernels::weighted_dot(
        {weights->data(), static_cast<std::size_t>(weights->size())},
        {values->data(), static_cast<std::size_t>(values->size())},
        {values->data(), static_cast<std::size_t>(values->size())}));
  if (probe.kind == Probe::Kind::point) {
    if (probe.index < 0 || probe.index >= values->size())
      throw std::invalid_argument("probe index out of range");
    return (*values)[probe.index];
  }
  throw std::invalid_argument("convolution probes support point and norm kinds");
}

}  // namespace

Trajectory run_convolution(const MaterialLaw& law, const DiscreteOps& ops, const Grid& grid,
                           const ConvolutionConfig& cfg, const BodyForce& f,
                           std::span<const Probe> probes, const RunOptions& opt) {
  if (!(cfg.dt > 0.0) || !(cfg.t_end >= cfg.dt))
    throw std::invalid_argument("convolution: need dt > 0 and T >= dt");
  if (law.dim() != grid.d)
    throw DimensionMismatch("convolution: law and grid dimensions differ");
  if (law.m0_schur_margin() <= 0.0)
    throw SolverError(SolverError::Code::singular_system,
                      "convolution: effective mass rho - rho_f A(0) is not positive");

  const int steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
  const double dt = cfg.dt;
  const int nv = grid.n_v();
  const int npsi = grid.n_psi();
  const int nc = grid.n_centers();
  const double rho = law.rho();
  const double rho_f = law.rho_f();
  const double alpha = law.alpha();
  const double c0 = law.c0();
  const auto v_to_all = interior_to_all_face_map(grid);

  // Kernel table A(m dt); all zero for the memory-free limit.
  std::vector<double> kernel_table(steps + 2, 0.0);
  if (law.series())
    for (int m = 0; m <= steps + 1; ++m) kernel_table[m] = law.series()->kernel(m * dt);
  const double a0 = kernel_table[0];

  auto restrict_v = [&](const Eigen::VectorXd& all) {
    Eigen::VectorXd out(nv);
    for (int i = 0; i < nv; ++i) out[i] = all[v_to_all[i]];
    return out;
  };
  auto embed_v = [&](const Eigen::VectorXd& vv) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(npsi);
    for (int i = 0; i < nv; ++i) out[v_to_all[i]] = vv[i];
    return out;
  };
  auto body_faces = [&](double t) {
    Eigen::VectorXd out(npsi);
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i <= grid.nx(); ++i)
        out[grid.xface_all(i, j)] =
            f(0, grid.face_x(i), grid.d == 2 ? grid.center_y(j) : 0.0, t);
    if (grid.d == 2)
      for (int j = 0; j <= grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i)
          out[grid.yface_all(i, j)] = f(1, grid.center_x(i), grid.face_y(j), t);
    return out;
  };
  auto elastic_force = [&](const Eigen::VectorXd& u) {
    return (ops.Ds * apply_stiffness(law, grid, ops.Gv * u)).eval();
  };

  // Pressure system (c0/dt) I + theta (dt A(0)/(2 rho_f)) (-Dv Gp).
  SpMat p_matrix = ops.Dv * ops.Gp * (-cfg.theta * dt * a0 / (2.0 * rho_f));
  for (int i = 0; i < nc; ++i) p_matrix.coeffRef(i, i) += c0 / dt;
  p_matrix.makeCompressed();
  Eigen::SparseLU<SpMat> p_solver;
  p_solver.compute(p_matrix);
  if (p_solver.info() != Eigen::Success)
    throw SolverError(SolverError::Code::singular_system,
                      "convolution: pressure system factorization failed");

  Eigen::VectorXd u_b = cfg.u0.size() ? cfg.u0 : Eigen::VectorXd::Zero(nv);
  Eigen::VectorXd v0 = cfg.v0.size() ? cfg.v0 : Eigen::VectorXd::Zero(nv);
  Eigen::VectorXd p_cur = cfg.p0.size() ? cfg.p0 : Eigen::VectorXd::Zero(nc);
  if (u_b.size() != nv || v0.size() != nv || p_cur.size() != nc)
    throw std::invalid_argument("convolution: initial data size mismatch");

  // Consistent initial acceleration: the operand contains the acceleration
  // itself through the A(0) g(0) term, so solve the scalar relation
  // (rho - rho_f A(0)) u''(0) = F_el - alpha grad p + rho f
  //                             - rho_f A(0) f|_v + A(0) (Gp p0)|_v.
  const Eigen::VectorXd f_all_0 = body_faces(0.0);
  const Eigen::VectorXd gp0 = ops.Gp * p_cur;
  Eigen::VectorXd acc0 = elastic_force(u_b) - alpha * (ops.Gp_v * p_cur) +
                         rho * restrict_v(f_all_0) - rho_f * a0 * restrict_v(f_all_0) +
                         a0 * restrict_v(gp0);
  acc0 /= (rho - rho_f * a0);

  HistoryBuffer history(npsi);
  Eigen::VectorXd g0 = f_all_0 - (1.0 / rho_f) * gp0 - embed_v(acc0);
  history.push(g0);

  Eigen::VectorXd u_a = u_b - dt * v0 + 0.5 * dt * dt * acc0;  // virtual u_{-1}
  Eigen::VectorXd phi_cur = Eigen::VectorXd::Zero(npsi);       // (A*g)(0)
  Eigen::VectorXd phi_prev;

  Trajectory traj;
  for (const auto& pr : probes) traj.probe_names.push_back(pr.name());
  traj.times.reserve(steps);

  for (int n = 0; n < steps; ++n) {
    const double t_n = n * dt;
    const double t_np1 = (n + 1) * dt;

    Eigen::VectorXd u_c(nv);
    if (n == 0) {
      u_c = u_b + dt * v0 + 0.5 * dt * dt * acc0;
    } else {
      const Eigen::VectorXd mem_dot = (phi_cur - phi_prev) / dt;
      u_c = 2.0 * u_b - u_a +
            (dt * dt / rho) *
                (elastic_force(u_b) - alpha * (ops.Gp_v * p_cur) -
                 rho_f * restrict_v(mem_dot) + rho * restrict_v(body_faces(t_n)));
    }

    const Eigen::VectorXd acc_lag = (u_c - 2.0 * u_b + u_a) / (dt * dt);
    const Eigen::VectorXd g_star = body_faces(t_np1) - embed_v(acc_lag);
    const Eigen::VectorXd partial = history.conv_partial_next(kernel_table, dt);

    Eigen::VectorXd rhs = (c0 / dt) * p_cur - alpha * (ops.Dv_v * ((u_c - u_b) / dt)) -
                          (1.0 - cfg.theta) * (ops.Dv * phi_cur) -
                          cfg.theta * (ops.Dv * (partial + 0.5 * dt * a0 * g_star));
    Eigen::VectorXd p_next = p_solver.solve(rhs);
    if (p_solver.info() != Eigen::Success)
      throw SolverError(SolverError::Code::linear_solve_failed,
                        "convolution: pressure solve failed");

    Eigen::VectorXd g_next = g_star - (1.0 / rho_f) * (ops.Gp * p_next);
    history.push(g_next);
    phi_prev = std::move(phi_cur);
    phi_cur = partial + 0.5 * dt * a0 * g_next;

    u_a = std::move(u_b);
    u_b = std::move(u_c);
    p_cur = std::move(p_next);

    if (u_b.lpNorm<Eigen::Infinity>() > cfg.blowup_threshold ||
        p_cur.lpNorm<Eigen::Infinity>() > cfg.blowup_threshold)
      throw SolverError(SolverError::Code::stability_breach,
                        "convolution: field norm exceeded blow-up threshold at t = " +
                            format_double(t_np1));

    traj.times.push_back(t_np1);
    std::vector<double> row;
    row.reserve(probes.size());
    for (const auto& pr : probes) row.push_back(probe_conv(pr, u_b, p_cur, ops));
    traj.rows.push_back(std::move(row));
    if (opt.record_u) traj.u_history.push_back(u_b);
    if (opt.record_p) traj.p_history.push_back(p_cur);
  }

  traj.final_u = u_b;
  traj.final_state = p_cur;
  return traj;
}

}  // namespace biot
