#include "biot/mms.hpp"

#include <cmath>
#include <ostream>

#include "biot/kernels.hpp"
#include "biot/num_io.hpp"

namespace biot {

namespace {

// Separable component amp * X(x) * Y(y) * sin(w t + phase); the y factor
// degenerates to 1 in 1-d (ky = 0, cosine profile).
struct TrigComp {
  double amp = 0.0;
  double kx = 0.0, ky = 0.0;
  bool cos_x = false, cos_y = true;
  double w = 0.0, phase = 0.0;

  double xf(double x) const { return cos_x ? std::cos(kx * x) : std::sin(kx * x); }
  double dxf(double x) const {
    return cos_x ? -kx * std::sin(kx * x) : kx * std::cos(kx * x);
  }
  double yf(double y) const { return cos_y ? std::cos(ky * y) : std::sin(ky * y); }
  double dyf(double y) const {
    return cos_y ? -ky * std::sin(ky * y) : ky * std::cos(ky * y);
  }

  double val(double x, double y, double t) const {
    return amp * xf(x) * yf(y) * std::sin(w * t + phase);
  }
  double dt(double x, double y, double t) const {
    return amp * xf(x) * yf(y) * w * std::cos(w * t + phase);
  }
  double dx(double x, double y, double t) const {
    return amp * dxf(x) * yf(y) * std::sin(w * t + phase);
  }
  double dy(double x, double y, double t) const {
    return amp * xf(x) * dyf(y) * std::sin(w * t + phase);
  }
};

constexpr double kHalfPi = 1.5707963267948966;

}  // namespace

MmsCase make_trig_case(const MaterialLaw& law, int d, double lx, double ly) {
  const double kx = M_PI / lx;
  const double ky = d == 2 ? M_PI / ly : 0.0;
  const double w0 = 2.0, w1 = 1.3, wp = 1.7;
  const int n = law.n_terms();

  std::vector<TrigComp> v(d);
  v[0] = {1.0, kx, ky, false, d == 2 ? false : true, w0, kHalfPi};
  if (d == 2) v[1] = {0.8, kx, ky, false, false, w0, 0.4 + kHalfPi};

  const int s = d * (d + 1) / 2;
  std::vector<TrigComp> sig(s);
  if (d == 1) {
    sig[0] = {0.7, kx, 0.0, true, true, w0, 0.0};
  } else {
    sig[0] = {0.7, kx, ky, true, true, w0, 0.0};
    sig[1] = {0.6, kx, ky, true, true, w0, 0.2};
    sig[2] = {0.4, kx, ky, true, true, w0, 0.5};
  }

  TrigComp pc{1.0, d == 1 ? 2.0 * kx : kx, ky, false, d == 2 ? false : true, w1, 0.0};

  std::vector<std::vector<TrigComp>> psi(n, std::vector<TrigComp>(d));
  for (int j = 0; j < n; ++j) {
    const double amp = 0.3 + 0.2 * j;
    const double ph = 0.3 * (j + 1);
    psi[j][0] = {amp, kx, ky, true, d == 2 ? false : true, wp, ph};
    if (d == 2) psi[j][1] = {0.9 * amp, kx, ky, false, true, wp, ph + 0.1};
  }

  const double rho = law.rho();
  const double rho_f = law.rho_f();
  const double c0 = law.c0();
  const double alpha = law.alpha();
  const Eigen::MatrixXd s_st = law.compliance_storage();
  std::vector<double> a(n), b(n);
  for (int j = 0; j < n; ++j) {
    a[j] = law.a(j);
    b[j] = law.b(j);
  }

  MmsCase mms;
  mms.name = "trig";
  mms.d = d;
  mms.v_exact = [v](int ax, double x, double y, double t) { return v[ax].val(x, y, t); };
  mms.sigma_exact = [sig](int c, double x, double y, double t) { return sig[c].val(x, y, t); };
  mms.p_exact = [pc](double x, double y, double t) { return pc.val(x, y, t); };
  mms.psi_exact = [psi](int j, int ax, double x, double y, double t) {
    return psi[j][ax].val(x, y, t);
  };

  auto div_sigma = [sig, d](int ax, double x, double y, double t) {
    if (d == 1) return sig[0].dx(x, y, t);
    if (ax == 0) return sig[0].dx(x, y, t) + sig[2].dy(x, y, t);
    return sig[2].dx(x, y, t) + sig[1].dy(x, y, t);
  };
  auto grad_p = [pc](int ax, double x, double y, double t) {
    return ax == 0 ? pc.dx(x, y, t) : pc.dy(x, y, t);
  };
  auto eps_v = [v, d](int comp, double x, double y, double t) {
    if (d == 1) return v[0].dx(x, y, t);
    if (comp == 0) return v[0].dx(x, y, t);
    if (comp == 1) return v[1].dy(x, y, t);
    return 0.5 * (v[0].dy(x, y, t) + v[1].dx(x, y, t));
  };

  mms.src_v = [v, psi, div_sigma, grad_p, rho, rho_f, alpha, n](int ax, double x, double y,
                                                                double t) {
    double val = rho * v[ax].dt(x, y, t) - div_sigma(ax, x, y, t) +
                 alpha * grad_p(ax, x, y, t);
    for (int j = 0; j < n; ++j) val += rho_f * psi[j][ax].dt(x, y, t);
    return val;
  };
  mms.src_sigma = [sig, eps_v, s_st, s](int comp, double x, double y, double t) {
    double val = -eps_v(comp, x, y, t);
    for (int q = 0; q < s; ++q) val += s_st(comp, q) * sig[q].dt(x, y, t);
    return val;
  };
  mms.src_p = [v, psi, pc, c0, alpha, d, n](double x, double y, double t) {
    double div_v = v[0].dx(x, y, t) + (d == 2 ? v[1].dy(x, y, t) : 0.0);
    double val = c0 * pc.dt(x, y, t) + alpha * div_v;
    for (int j = 0; j < n; ++j)
      val += psi[j][0].dx(x, y, t) + (d == 2 ? psi[j][1].dy(x, y, t) : 0.0);
    return val;
  };
  mms.src_psi = [v, psi, grad_p, a, b, rho_f](int j, int ax, double x, double y, double t) {
    return a[j] * psi[j][ax].dt(x, y, t) + b[j] * psi[j][ax].val(x, y, t) +
           grad_p(ax, x, y, t) + rho_f * v[ax].dt(x, y, t);
  };
  return mms;
}

MmsCase make_constant_case(const MaterialLaw& law, int d) {
  const int n = law.n_terms();
  std::vector<double> b(n);
  for (int j = 0; j < n; ++j) b[j] = law.b(j);

  MmsCase mms;
  mms.name = "constant";
  mms.d = d;
  mms.v_exact = [](int, double, double, double) { return 0.0; };
  mms.sigma_exact = [](int comp, double, double, double) { return 0.8 - 0.1 * comp; };
  mms.p_exact = [](double, double, double) { return 0.0; };
  mms.psi_exact = [](int j, int ax, double, double, double) {
    return 0.5 + 0.1 * j + 0.05 * ax;
  };
  mms.src_v = [](int, double, double, double) { return 0.0; };
  mms.src_sigma = [](int, double, double, double) { return 0.0; };
  mms.src_p = [](double, double, double) { return 0.0; };
  mms.src_psi = [b, psi = mms.psi_exact](int j, int ax, double x, double y, double t) {
    return b[j] * psi(j, ax, x, y, t);
  };
  return mms;
}

MmsCase make_mms_case(const std::string& name, const MaterialLaw& law, int d, double lx,
                      double ly) {
  if (name == "trig") return make_trig_case(law, d, lx, ly);
  if (name == "constant") return make_constant_case(law, d);
  throw std::invalid_argument("mms: unknown case " + name);
}

namespace {

template <typename F>
void for_each_vface(const Grid& grid, F&& fn) {
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 1; i <= grid.nx() - 1; ++i)
      fn(0, grid.xface_interior(i, j), grid.face_x(i),
         grid.d == 2 ? grid.center_y(j) : 0.0);
  if (grid.d == 2)
    for (int j = 1; j <= grid.ny() - 1; ++j)
      for (int i = 0; i < grid.nx(); ++i)
        fn(1, grid.yface_interior(i, j), grid.center_x(i), grid.face_y(j));
}

template <typename F>
void for_each_face_all(const Grid& grid, F&& fn) {
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i <= grid.nx(); ++i)
      fn(0, grid.xface_all(i, j), grid.face_x(i), grid.d == 2 ? grid.center_y(j) : 0.0);
  if (grid.d == 2)
    for (int j = 0; j <= grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i)
        fn(1, grid.yface_all(i, j), grid.center_x(i), grid.face_y(j));
}

template <typename F>
void for_each_center(const Grid& grid, F&& fn) {
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i)
      fn(grid.center(i, j), grid.center_x(i), grid.d == 2 ? grid.center_y(j) : 0.0);
}

}  // namespace

Eigen::VectorXd sample_exact_state(const MmsCase& mms, const Grid& grid,
                                   const StateLayout& layout, double t) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(layout.total);
  for_each_vface(grid, [&](int ax, int idx, double x, double y) {
    u[layout.v_off + idx] = mms.v_exact(ax, x, y, t);
  });
  const int nc = grid.n_centers();
  for_each_center(grid, [&](int idx, double x, double y) {
    for (int comp = 0; comp < grid.sigma_components(); ++comp)
      u[layout.sigma_off + comp * nc + idx] = mms.sigma_exact(comp, x, y, t);
    u[layout.p_off + idx] = mms.p_exact(x, y, t);
  });
  for (int j = 0; j < layout.n_terms; ++j)
    for_each_face_all(grid, [&](int ax, int idx, double x, double y) {
      u[layout.psi_off(j) + idx] = mms.psi_exact(j, ax, x, y, t);
    });
  return u;
}

Forcing mms_forcing(const MmsCase& mms, const Grid& grid, const StateLayout& layout) {
  Forcing f;
  f.eval = [mms, grid, layout](double t, Eigen::VectorXd& g) {
    g.setZero();
    for_each_vface(grid, [&](int ax, int idx, double x, double y) {
      g[layout.v_off + idx] = mms.src_v(ax, x, y, t);
    });
    const int nc = grid.n_centers();
    for_each_center(grid, [&](int idx, double x, double y) {
      for (int comp = 0; comp < grid.sigma_components(); ++comp)
        g[layout.sigma_off + comp * nc + idx] = mms.src_sigma(comp, x, y, t);
      g[layout.p_off + idx] = mms.src_p(x, y, t);
    });
    for (int j = 0; j < layout.n_terms; ++j)
      for_each_face_all(grid, [&](int ax, int idx, double x, double y) {
        g[layout.psi_off(j) + idx] = mms.src_psi(j, ax, x, y, t);
      });
  };
  return f;
}

double mms_error(const MmsCase& mms, const Grid& grid, const StateLayout& layout,
                 const DiscreteOps& ops, const Eigen::VectorXd& state, double t) {
  const Eigen::VectorXd exact = sample_exact_state(mms, grid, layout, t);
  const Eigen::VectorXd w = layout.weights(ops);
  const Eigen::VectorXd err = state - exact;
  auto wnorm = [&](const Eigen::VectorXd& x) {
    return std::sqrt(kernels::weighted_dot({w.data(), static_cast<std::size_t>(w.size())},
                                           {x.data(), static_cast<std::size_t>(x.size())},
                                           {x.data(), static_cast<std::size_t>(x.size())}));
  };
  const double base = wnorm(exact);
  return wnorm(err) / (base > 0.0 ? base : 1.0);
}

double ConvergenceTable::observed_order() const {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : rows)
    if (r.level > 0) {
      sum += r.order;
      ++count;
    }
  return count ? sum / count : 0.0;
}

void ConvergenceTable::write_csv(std::ostream& out) const {
  out << "level,cells,h,dt,error,order\n";
  for (const auto& r : rows)
    out << r.level << ',' << r.cells << ',' << format_double(r.h) << ','
        << format_double(r.dt) << ',' << format_double(r.error) << ','
        << format_double(r.order) << '\n';
}

ConvergenceTable mms_study(const MaterialParams& params, const PermeabilitySeries& series,
                           const MmsStudyConfig& cfg) {
  if (cfg.cells.size() < 3)
    throw std::invalid_argument("mms_study: need at least 3 refinement levels");
  const int levels = static_cast<int>(cfg.cells.size());
  ConvergenceTable table;

  for (int k = 0; k < levels; ++k) {
    const int cells = cfg.mode == RefineMode::time_only ? cfg.cells[0] : cfg.cells[k];
    double dt = cfg.dt0;
    if (cfg.mode == RefineMode::space_time)
      dt = cfg.dt0 * static_cast<double>(cfg.cells[0]) / cells;
    else if (cfg.mode == RefineMode::time_only)
      dt = cfg.dt0 / static_cast<double>(1 << k);

    const std::array<double, 2> ext{cfg.extent, cfg.extent};
    const std::array<int, 2> cc{cells, cells};
    const Grid grid = Grid::make(cfg.d, ext, cc);
    const MaterialLaw law(params, series, cfg.d);
    const DiscreteOps ops = build_ops(grid);
    const StateLayout layout = StateLayout::make(grid, law.n_terms());
    const MmsCase mms = make_mms_case(cfg.case_name, law, cfg.d, cfg.extent, cfg.extent);

    SolverConfig scfg;
    scfg.dt = dt;
    scfg.t_end = cfg.t_end;
    scfg.theta = cfg.theta;
    const Eigen::VectorXd exact0 = sample_exact_state(mms, grid, layout, 0.0);
    scfg.v0 = layout.v(exact0);
    scfg.p0 = layout.p(exact0);
    scfg.sigma0 = layout.sigma(exact0);
    for (int j = 0; j < layout.n_terms; ++j) scfg.psi0.push_back(layout.psi(exact0, j));

    SteppingOperator stepper = SteppingOperator::assemble(law, ops, grid, scfg);
    const Forcing forcing = mms_forcing(mms, grid, layout);
    const int steps = static_cast<int>(std::llround(scfg.t_end / dt));
    Trajectory traj = run(stepper, layout, ops, scfg, forcing, {}, exact0);
    const double err =
        mms_error(mms, grid, layout, ops, traj.final_state, steps * dt);

    ConvergenceRow row;
    row.level = k;
    row.cells = cells;
    row.h = grid.h[0];
    row.dt = dt;
    row.error = err;
    if (k > 0) row.order = std::log2(table.rows.back().error / err);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace biot
