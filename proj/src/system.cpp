#include "biot/system.hpp"

#include <cmath>
#include <ostream>

#include "biot/kernels.hpp"
#include "biot/num_io.hpp"

namespace biot {

namespace {

using Triplet = Eigen::Triplet<double>;

void add_block(std::vector<Triplet>& trip, const SpMat& m, int row_off, int col_off,
               double scale = 1.0) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      trip.emplace_back(row_off + it.row(), col_off + it.col(), scale * it.value());
}

SpMat sparse_from(int rows, int cols, std::vector<Triplet>& trip) {
  SpMat m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

}  // namespace

StateLayout StateLayout::make(const Grid& grid, int n_terms) {
  StateLayout l;
  l.nv = grid.n_v();
  l.nsigma = grid.n_sigma();
  l.np = grid.n_centers();
  l.npsi = grid.n_psi();
  l.n_terms = n_terms;
  l.v_off = 0;
  l.sigma_off = l.nv;
  l.p_off = l.sigma_off + l.nsigma;
  l.psi_base = l.p_off + l.np;
  l.total = l.psi_base + n_terms * l.npsi;
  return l;
}

Eigen::VectorXd StateLayout::weights(const DiscreteOps& ops) const {
  Eigen::VectorXd w(total);
  w.segment(v_off, nv) = ops.wv;
  w.segment(sigma_off, nsigma) = ops.ws;
  w.segment(p_off, np) = ops.wc;
  for (int j = 0; j < n_terms; ++j) w.segment(psi_off(j), npsi) = ops.wf;
  return w;
}

Forcing Forcing::none() {
  Forcing f;
  f.is_zero = true;
  f.eval = [](double, Eigen::VectorXd& g) { g.setZero(); };
  return f;
}

Forcing Forcing::from_body_force(const MaterialLaw& law, const Grid& grid,
                                 const StateLayout& layout, BodyForce f) {
  const double rho = law.rho();
  const double rho_f = law.rho_f();
  Forcing out;
  out.eval = [grid, layout, rho, rho_f, f = std::move(f)](double t, Eigen::VectorXd& g) {
    g.setZero();
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i <= grid.nx(); ++i) {
        const double x = grid.face_x(i);
        const double y = grid.d == 2 ? grid.center_y(j) : 0.0;
        const double val = f(0, x, y, t);
        if (i >= 1 && i <= grid.nx() - 1)
          g[layout.v_off + grid.xface_interior(i, j)] = rho * val;
        for (int term = 0; term < layout.n_terms; ++term)
          g[layout.psi_off(term) + grid.xface_all(i, j)] = rho_f * val;
      }
    if (grid.d == 2)
      for (int j = 0; j <= grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i) {
          const double val = f(1, grid.center_x(i), grid.face_y(j), t);
          if (j >= 1 && j <= grid.ny() - 1)
            g[layout.v_off + grid.yface_interior(i, j)] = rho * val;
          for (int term = 0; term < layout.n_terms; ++term)
            g[layout.psi_off(term) + grid.yface_all(i, j)] = rho_f * val;
        }
  };
  return out;
}

void SolverConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("solver: dt must be positive");
  if (!(t_end >= dt)) throw std::invalid_argument("solver: T must be >= dt");
  if (!(theta >= 0.5 && theta <= 1.0))
    throw std::invalid_argument("solver: theta must lie in [0.5, 1]");
}

std::string Probe::name() const {
  switch (kind) {
    case Kind::energy:
      return "energy";
    case Kind::norm:
      return "norm:" + field;
    case Kind::point:
      return "point:" + field + ":" + std::to_string(index);
  }
  return "?";
}

void Trajectory::write_csv(std::ostream& out) const {
  out << 't';
  for (const auto& n : probe_names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << format_double(times[r]);
    for (double v : rows[r]) out << ',' << format_double(v);
    out << '\n';
  }
}

SystemBlocks build_system_blocks(const MaterialLaw& law, const DiscreteOps& ops,
                                 const Grid& grid) {
  if (law.dim() != grid.d)
    throw DimensionMismatch("system: material law and grid dimensions differ");
  const StateLayout layout = StateLayout::make(grid, law.n_terms());
  const int nc = grid.n_centers();
  const int s = grid.sigma_components();
  const auto v_to_all = interior_to_all_face_map(grid);
  const double alpha = law.alpha();

  std::vector<Triplet> t0, t1, ta;

  for (int i = 0; i < layout.nv; ++i)
    t0.emplace_back(layout.v_off + i, layout.v_off + i, law.rho());
  const Eigen::MatrixXd& s_st = law.compliance_storage();
  for (int c = 0; c < nc; ++c)
    for (int p = 0; p < s; ++p)
      for (int q = 0; q < s; ++q)
        if (s_st(p, q) != 0.0)
          t0.emplace_back(layout.sigma_off + p * nc + c, layout.sigma_off + q * nc + c,
                          s_st(p, q));
  for (int i = 0; i < layout.np; ++i)
    t0.emplace_back(layout.p_off + i, layout.p_off + i, law.c0());
  for (int j = 0; j < law.n_terms(); ++j) {
    for (int i = 0; i < layout.npsi; ++i)
      t0.emplace_back(layout.psi_off(j) + i, layout.psi_off(j) + i, law.a(j));
    for (int iv = 0; iv < layout.nv; ++iv) {
      const int ia = v_to_all[iv];
      t0.emplace_back(layout.v_off + iv, layout.psi_off(j) + ia, law.rho_f());
      t0.emplace_back(layout.psi_off(j) + ia, layout.v_off + iv, law.rho_f());
    }
    for (int i = 0; i < layout.npsi; ++i)
      t1.emplace_back(layout.psi_off(j) + i, layout.psi_off(j) + i, law.b(j));
  }

  // A rows: v: -Div sigma + alpha grad0 p; sigma: -Grad0 v;
  // p: alpha div v + sum_j div psi_j; psi_j: grad0 p.
  add_block(ta, ops.Ds, layout.v_off, layout.sigma_off, -1.0);
  add_block(ta, ops.Gp_v, layout.v_off, layout.p_off, alpha);
  add_block(ta, ops.Gv, layout.sigma_off, layout.v_off, -1.0);
  add_block(ta, ops.Dv_v, layout.p_off, layout.v_off, alpha);
  for (int j = 0; j < law.n_terms(); ++j) {
    add_block(ta, ops.Dv, layout.p_off, layout.psi_off(j));
    add_block(ta, ops.Gp, layout.psi_off(j), layout.p_off);
  }

  SystemBlocks blocks;
  blocks.m0 = sparse_from(layout.total, layout.total, t0);
  blocks.m1 = sparse_from(layout.total, layout.total, t1);
  blocks.a = sparse_from(layout.total, layout.total, ta);
  return blocks;
}

Eigen::VectorXd apply_stiffness(const MaterialLaw& law, const Grid& grid,
                                const Eigen::VectorXd& eps) {
  const int nc = grid.n_centers();
  const int s = grid.sigma_components();
  const Eigen::MatrixXd& c_st = law.stiffness_storage();
  Eigen::VectorXd out(eps.size());
  Eigen::VectorXd local(s), res(s);
  for (int c = 0; c < nc; ++c) {
    for (int p = 0; p < s; ++p) local[p] = eps[p * nc + c];
    res.noalias() = c_st * local;
    for (int p = 0; p < s; ++p) out[p * nc + c] = res[p];
  }
  return out;
}

Eigen::VectorXd initial_state(const MaterialLaw& law, const DiscreteOps& ops,
                              const Grid& grid, const StateLayout& layout,
                              const SolverConfig& cfg) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(layout.total);
  auto place = [](Eigen::VectorBlock<Eigen::VectorXd> dst, const Eigen::VectorXd& src,
                  const char* what) {
    if (src.size() == 0) return;
    if (src.size() != dst.size())
      throw std::invalid_argument(std::string("initial data size mismatch for ") + what);
    dst = src;
  };
  place(layout.v(u), cfg.v0, "v0");
  place(layout.p(u), cfg.p0, "p0");
  if (cfg.sigma0.size() != 0) {
    place(layout.sigma(u), cfg.sigma0, "sigma0");
  } else if (cfg.u0.size() != 0) {
    if (cfg.u0.size() != layout.nv)
      throw std::invalid_argument("initial data size mismatch for u0");
    layout.sigma(u) = apply_stiffness(law, grid, ops.Gv * cfg.u0);
  }
  for (int j = 0; j < static_cast<int>(cfg.psi0.size()) && j < layout.n_terms; ++j)
    place(layout.psi(u, j), cfg.psi0[j], "psi0");
  return u;
}

SteppingOperator::SteppingOperator(SpMat m0, SpMat m1, SpMat a, Eigen::VectorXd weights,
                                   double dt, double theta, double linear_tol)
    : m0_(std::move(m0)),
      m1_(std::move(m1)),
      a_(std::move(a)),
      w_(std::move(weights)),
      dt_(dt),
      theta_(theta),
      linear_tol_(linear_tol) {
  SpMat stiff = m1_ + a_;
  l_plus_ = m0_ * (1.0 / dt_) + theta_ * stiff;
  l_minus_ = m0_ * (1.0 / dt_) - (1.0 - theta_) * stiff;
  l_plus_.makeCompressed();
  l_minus_.makeCompressed();
  lu_.compute(l_plus_);
  if (lu_.info() != Eigen::Success)
    throw SolverError(SolverError::Code::singular_system,
                      "stepping operator: factorization of L+ failed");
}

SteppingOperator SteppingOperator::assemble(const MaterialLaw& law, const DiscreteOps& ops,
                                            const Grid& grid, const SolverConfig& cfg) {
  cfg.validate();
  if (law.m0_schur_margin() <= 0.0) {
    std::string msg =
        "assemble: M0 is not positive definite; the Schur condition "
        "c_j F/(d_j eta) > 1/rho fails (margin " +
        format_double(law.m0_schur_margin()) + "). Terms c_j F/(d_j eta):";
    for (int j = 0; j < law.n_terms(); ++j)
      msg += " " + format_double(law.a(j) / (law.rho_f() * law.rho_f()));
    msg += "; 1/rho = " + format_double(1.0 / law.rho());
    throw SolverError(SolverError::Code::singular_system, msg);
  }
  SystemBlocks blocks = build_system_blocks(law, ops, grid);
  const StateLayout layout = StateLayout::make(grid, law.n_terms());
  return SteppingOperator(std::move(blocks.m0), std::move(blocks.m1), std::move(blocks.a),
                          layout.weights(ops), cfg.dt, cfg.theta, cfg.linear_tol);
}

void SteppingOperator::step(Eigen::VectorXd& u, const Eigen::VectorXd& g_n,
                            const Eigen::VectorXd& g_np1) const {
  Eigen::VectorXd rhs = l_minus_ * u;
  if (g_np1.size()) rhs.noalias() += theta_ * g_np1;
  if (g_n.size()) rhs.noalias() += (1.0 - theta_) * g_n;
  Eigen::VectorXd next = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success)
    throw SolverError(SolverError::Code::linear_solve_failed, "step: sparse solve failed");
  const double rhs_norm = rhs.norm();
  const double res = (l_plus_ * next - rhs).norm();
  if (res > linear_tol_ * std::max(rhs_norm, 1.0))
    throw SolverError(SolverError::Code::linear_solve_failed,
                      "step: residual " + format_double(res) + " exceeds tolerance");
  u = std::move(next);
}

double SteppingOperator::energy(const Eigen::VectorXd& u) const {
  Eigen::VectorXd m0u = m0_ * u;
  return 0.5 * kernels::weighted_dot({w_.data(), static_cast<std::size_t>(w_.size())},
                                     {m0u.data(), static_cast<std::size_t>(m0u.size())},
                                     {u.data(), static_cast<std::size_t>(u.size())});
}

double SteppingOperator::weighted_norm(const Eigen::VectorXd& u) const {
  return std::sqrt(kernels::weighted_dot({w_.data(), static_cast<std::size_t>(w_.size())},
                                         {u.data(), static_cast<std::size_t>(u.size())},
                                         {u.data(), static_cast<std::size_t>(u.size())}));
}

namespace {

double field_norm(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
  return std::sqrt(kernels::weighted_dot(
      {weights.data(), static_cast<std::size_t>(weights.size())},
      {values.data(), static_cast<std::size_t>(values.size())},
      {values.data(), static_cast<std::size_t>(values.size())}));
}

struct ProbeContext {
  const StateLayout& layout;
  const DiscreteOps& ops;
  const SteppingOperator& stepper;
  const Eigen::VectorXd& state;
  const Eigen::VectorXd& u_accum;
};

double eval_probe(const Probe& probe, const ProbeContext& ctx) {
  if (probe.kind == Probe::Kind::energy) return ctx.stepper.energy(ctx.state);
  auto view = [&](const std::string& field) -> std::pair<Eigen::VectorXd, const Eigen::VectorXd*> {
    if (field == "v") return {ctx.layout.v(ctx.state), &ctx.ops.wv};
    if (field == "sigma") return {ctx.layout.sigma(ctx.state), &ctx.ops.ws};
    if (field == "p") return {ctx.layout.p(ctx.state), &ctx.ops.wc};
    if (field == "u") return {ctx.u_accum, &ctx.ops.wv};
    if (field.rfind("psi", 0) == 0) {
      const int j = field.size() > 3 ? std::stoi(field.substr(3)) : 0;
      if (j < 0 || j >= ctx.layout.n_terms)
        throw std::invalid_argument("probe: no auxiliary field " + field);
      return {ctx.layout.psi(ctx.state, j), &ctx.ops.wf};
    }
    throw std::invalid_argument("probe: unknown field " + field);
  };
  auto [values, weights] = view(probe.field);
  if (probe.kind == Probe::Kind::norm) return field_norm(values, *weights);
  if (probe.index < 0 || probe.index >= values.size())
    throw std::invalid_argument("probe: index out of range for field " + probe.field);
  return values[probe.index];
}

}  // namespace

Trajectory run(const SteppingOperator& stepper, const StateLayout& layout,
               const DiscreteOps& ops, const SolverConfig& cfg, const Forcing& forcing,
               std::span<const Probe> probes, Eigen::VectorXd initial,
               const RunOptions& opt) {
  cfg.validate();
  const int steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));

  Eigen::VectorXd state =
      initial.size() ? std::move(initial) : Eigen::VectorXd::Zero(layout.total);
  if (state.size() != layout.total)
    throw std::invalid_argument("run: initial state has wrong size");

  bool need_u = opt.record_u;
  for (const auto& pr : probes) need_u = need_u || pr.field == "u";
  Eigen::VectorXd u_acc =
      cfg.u0.size() ? Eigen::VectorXd(cfg.u0) : Eigen::VectorXd::Zero(layout.nv);

  Trajectory traj;
  for (const auto& pr : probes) traj.probe_names.push_back(pr.name());
  traj.times.reserve(steps);
  traj.rows.reserve(steps);

  Eigen::VectorXd g_n(layout.total), g_np1(layout.total);
  forcing.eval(0.0, g_n);
  Eigen::VectorXd v_old;

  for (int n = 0; n < steps; ++n) {
    const double t_np1 = (n + 1) * cfg.dt;
    forcing.eval(t_np1, g_np1);
    if (need_u) v_old = layout.v(state);
    stepper.step(state, g_n, g_np1);
    if (need_u) u_acc += 0.5 * cfg.dt * (v_old + Eigen::VectorXd(layout.v(state)));

    traj.times.push_back(t_np1);
    std::vector<double> row;
    row.reserve(probes.size());
    ProbeContext ctx{layout, ops, stepper, state, u_acc};
    for (const auto& pr : probes) row.push_back(eval_probe(pr, ctx));
    traj.rows.push_back(std::move(row));
    if (opt.record_u) traj.u_history.push_back(need_u ? u_acc : Eigen::VectorXd());
    if (opt.record_p) traj.p_history.emplace_back(layout.p(state));
    std::swap(g_n, g_np1);
  }
  traj.final_state = std::move(state);
  traj.final_u = std::move(u_acc);
  return traj;
}

std::vector<double> integrate_single_ade(double c, double d_weight, double prefactor,
                                         double theta, double dt, int steps,
                                         const std::function<double(double)>& g, double psi0) {
  std::vector<double> psi(steps);
  const double gain = prefactor * d_weight;
  double cur = psi0;
  for (int n = 0; n < steps; ++n) {
    const double t_n = n * dt;
    const double t_np1 = (n + 1) * dt;
    const double rhs = (c / dt - (1.0 - theta)) * cur +
                       theta * gain * g(t_np1) + (1.0 - theta) * gain * g(t_n);
    cur = rhs / (c / dt + theta);
    psi[n] = cur;
  }
  return psi;
}

std::complex<double> measure_ade_transfer(const PermeabilitySeries& series, double omega,
                                          double theta, double dt) {
  if (omega < 0.0) throw std::invalid_argument("transfer: omega must be >= 0");
  double c_max = 0.0;
  for (const auto& t : series.terms()) c_max = std::max(c_max, t.c);

  if (omega == 0.0) {
    // Constant drive; the equilibrium is prefactor * sum d_j.
    const int steps = static_cast<int>(std::ceil(40.0 * c_max / dt));
    double total = 0.0;
    for (const auto& t : series.terms()) {
      auto psi = integrate_single_ade(t.c, t.d, series.prefactor(), theta, dt, steps,
                                      [](double) { return 1.0; });
      total += psi.back();
    }
    return {total, 0.0};
  }

  if (omega * dt > 0.1)
    throw SolverError(SolverError::Code::resolution,
                      "transfer: omega*dt = " + format_double(omega * dt) +
                          " violates the resolution guard omega*dt <= 0.1");

  const double period = 2.0 * M_PI / omega;
  const int trans_steps = static_cast<int>(std::ceil(std::max(40.0 * c_max, period) / dt));
  const int meas_steps = static_cast<int>(std::ceil(4.0 * period / dt));
  const int steps = trans_steps + meas_steps;
  auto g = [omega](double t) { return std::sin(omega * t); };

  Eigen::VectorXd total = Eigen::VectorXd::Zero(steps);
  for (const auto& t : series.terms()) {
    auto psi = integrate_single_ade(t.c, t.d, series.prefactor(), theta, dt, steps, g);
    for (int n = 0; n < steps; ++n) total[n] += psi[n];
  }

  // Least-squares fit psi ~ s*sin(w t) + c*cos(w t) over the tail window;
  // the steady response to sin is Re(H) sin + Im(H) cos.
  double ss = 0.0, sc = 0.0, cc = 0.0, ys = 0.0, yc = 0.0;
  for (int n = trans_steps; n < steps; ++n) {
    const double t = (n + 1) * dt;
    const double sn = std::sin(omega * t), cs = std::cos(omega * t);
    ss += sn * sn;
    sc += sn * cs;
    cc += cs * cs;
    ys += total[n] * sn;
    yc += total[n] * cs;
  }
  const double det = ss * cc - sc * sc;
  const double s_coef = (ys * cc - yc * sc) / det;
  const double c_coef = (yc * ss - ys * sc) / det;
  return {s_coef, c_coef};
}

}  // namespace biot
