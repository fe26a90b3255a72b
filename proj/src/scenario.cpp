#include "biot/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "biot/conv_oracle.hpp"
#include "biot/grid.hpp"
#include "biot/kernels.hpp"
#include "biot/material.hpp"
#include "biot/mms.hpp"
#include "biot/num_io.hpp"
#include "biot/operators.hpp"
#include "biot/permeability.hpp"
#include "biot/system.hpp"

namespace biot {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 53-bit uniform in [0,1); avoids distribution classes so streams are
// reproducible across standard libraries.
double rng_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string locate_line(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double get_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

int get_or(const json& j, const char* key, int fallback) {
  return j.contains(key) ? j.at(key).get<int>() : fallback;
}

bool get_or(const json& j, const char* key, bool fallback) {
  return j.contains(key) ? j.at(key).get<bool>() : fallback;
}

struct LoadedPermeability {
  std::optional<PermeabilitySeries> series;
  std::optional<FitResult> fit;
};

LoadedPermeability load_permeability(const json& cfg, const MaterialParams* params,
                                     const fs::path& config_dir) {
  LoadedPermeability out;
  if (!cfg.contains("permeability")) return out;
  const json& pj = cfg.at("permeability");
  if (get_or(pj, "none", false)) return out;

  if (pj.contains("series")) {
    out.series = PermeabilitySeries::from_json(pj.at("series"));
    return out;
  }
  if (pj.contains("terms")) {
    if (!params)
      throw ConfigError("permeability: 'terms' without eta_k/F requires a material block");
    std::vector<PermeabilityTerm> terms;
    for (const auto& t : pj.at("terms"))
      terms.push_back({t.at("c").get<double>(), t.at("d").get<double>()});
    out.series = params->make_series(std::move(terms));
    return out;
  }
  if (pj.contains("samples_csv")) {
    const fs::path path = config_dir / pj.at("samples_csv").get<std::string>();
    std::ifstream in(path);
    if (!in) throw ConfigError("permeability: cannot open samples file " + path.string());
    const auto samples = read_samples_csv(in);
    const json& fj = pj.at("fit");
    FitOptions opt;
    opt.max_iterations = get_or(fj, "max_iterations", opt.max_iterations);
    opt.pole_tolerance = get_or(fj, "pole_tolerance", opt.pole_tolerance);
    if (fj.contains("static_limit")) opt.static_limit = fj.at("static_limit").get<double>();
    if (fj.contains("relaxation_time_bound"))
      opt.relaxation_time_bound = fj.at("relaxation_time_bound").get<double>();
    if (get_or(fj, "use_material_prefactor", false)) {
      if (!params) throw ConfigError("permeability fit: material block required");
      opt.eta_k = params->eta_k();
      opt.formation_factor = params->formation_factor();
    }
    out.fit = fit_series(samples, fj.at("n_terms").get<int>(), opt);
    out.series = out.fit->series;
    return out;
  }
  throw ConfigError("permeability: give 'series', 'terms', 'samples_csv' or 'none'");
}

Grid load_grid(const json& cfg) {
  if (!cfg.contains("grid")) throw ConfigError("missing 'grid' block");
  const json& gj = cfg.at("grid");
  const int d = gj.at("d").get<int>();
  std::vector<double> extents;
  for (const auto& e : gj.at("extents")) extents.push_back(e.get<double>());
  std::vector<int> cells;
  for (const auto& c : gj.at("cells")) cells.push_back(c.get<int>());
  return Grid::make(d, extents, cells);
}

SolverConfig load_solver(const json& cfg, const Grid& grid, const StateLayout& layout) {
  if (!cfg.contains("solver")) throw ConfigError("missing 'solver' block");
  const json& sj = cfg.at("solver");
  SolverConfig s;
  s.dt = sj.at("dt").get<double>();
  s.t_end = sj.at("T").get<double>();
  s.theta = get_or(sj, "theta", 1.0);
  s.linear_tol = get_or(sj, "linear_tol", 1e-9);

  const json init = sj.contains("initial") ? sj.at("initial") : json{{"type", "zero"}};
  const std::string type = init.at("type").get<std::string>();
  if (type == "zero") {
    // all fields zero
  } else if (type == "random") {
    std::mt19937_64 rng(static_cast<std::uint64_t>(get_or(init, "seed", 1)));
    const double amp = get_or(init, "amplitude", 1.0);
    auto fill = [&](Eigen::VectorXd& v, int n) {
      v.resize(n);
      for (int i = 0; i < n; ++i) v[i] = amp * (2.0 * rng_uniform(rng) - 1.0);
    };
    fill(s.v0, layout.nv);
    fill(s.p0, layout.np);
    fill(s.sigma0, layout.nsigma);
    s.psi0.resize(layout.n_terms);
    for (int j = 0; j < layout.n_terms; ++j) fill(s.psi0[j], layout.npsi);
  } else if (type == "standing") {
    const double vamp = get_or(init, "v_amplitude", 1.0);
    const double pamp = get_or(init, "p_amplitude", 0.0);
    const int mode = get_or(init, "mode", 1);
    const double kx = mode * M_PI / grid.extent[0];
    const double ky = grid.d == 2 ? mode * M_PI / grid.extent[1] : 0.0;
    s.v0.setZero(layout.nv);
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 1; i <= grid.nx() - 1; ++i) {
        double prof = std::sin(kx * grid.face_x(i));
        if (grid.d == 2) prof *= std::sin(ky * grid.center_y(j));
        s.v0[grid.xface_interior(i, j)] = vamp * prof;
      }
    if (grid.d == 2)
      for (int j = 1; j <= grid.ny() - 1; ++j)
        for (int i = 0; i < grid.nx(); ++i)
          s.v0[grid.yface_interior(i, j)] =
              vamp * std::sin(kx * grid.center_x(i)) * std::sin(ky * grid.face_y(j));
    s.p0.setZero(layout.np);
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i) {
        double prof = std::sin(kx * grid.center_x(i));
        if (grid.d == 2) prof *= std::sin(ky * grid.center_y(j));
        s.p0[grid.center(i, j)] = pamp * prof;
      }
  } else {
    throw ConfigError("solver.initial: unknown type " + type);
  }
  return s;
}

BodyForce load_body_force(const json& cfg, const Grid& grid) {
  const json fj = cfg.contains("forcing") ? cfg.at("forcing") : json{{"type", "none"}};
  const std::string type = fj.at("type").get<std::string>();
  if (type == "none") return [](int, double, double, double) { return 0.0; };
  if (type == "uniform_sine") {
    const double amp = fj.at("amplitude").get<double>();
    const double omega = fj.at("omega").get<double>();
    return [amp, omega](int, double, double, double t) { return amp * std::sin(omega * t); };
  }
  if (type == "standing_sine") {
    const double amp = fj.at("amplitude").get<double>();
    const double omega = fj.at("omega").get<double>();
    const int mode = get_or(fj, "mode", 1);
    const double kx = mode * M_PI / grid.extent[0];
    const double ky = grid.d == 2 ? mode * M_PI / grid.extent[1] : 0.0;
    const int d = grid.d;
    return [amp, omega, kx, ky, d](int, double x, double y, double t) {
      double prof = std::sin(kx * x);
      if (d == 2) prof *= std::sin(ky * y);
      return amp * prof * std::sin(omega * t);
    };
  }
  if (type == "gaussian_pulse") {
    const double amp = fj.at("amplitude").get<double>();
    const double t0 = fj.at("t0").get<double>();
    const double tau = fj.at("tau").get<double>();
    const double x0 = get_or(fj, "x0", 0.5 * grid.extent[0]);
    const double y0 = get_or(fj, "y0", 0.5 * grid.extent[1]);
    const double width = get_or(fj, "width", 0.1 * grid.extent[0]);
    const int d = grid.d;
    return [=](int, double x, double y, double t) {
      double arg = ((x - x0) * (x - x0)) / (2.0 * width * width);
      if (d == 2) arg += ((y - y0) * (y - y0)) / (2.0 * width * width);
      const double tt = (t - t0) / tau;
      return amp * std::exp(-arg - 0.5 * tt * tt);
    };
  }
  throw ConfigError("forcing: unknown type " + type);
}

std::vector<Probe> load_probes(const json& cfg) {
  std::vector<Probe> probes;
  if (!cfg.contains("probes")) {
    probes.push_back({Probe::Kind::energy, "", 0});
    return probes;
  }
  for (const auto& pj : cfg.at("probes")) {
    Probe p;
    const std::string kind = pj.at("kind").get<std::string>();
    if (kind == "energy") {
      p.kind = Probe::Kind::energy;
    } else if (kind == "norm") {
      p.kind = Probe::Kind::norm;
      p.field = pj.at("field").get<std::string>();
    } else if (kind == "point") {
      p.kind = Probe::Kind::point;
      p.field = pj.at("field").get<std::string>();
      p.index = pj.at("index").get<int>();
    } else {
      throw ConfigError("probes: unknown kind " + kind);
    }
    probes.push_back(std::move(p));
  }
  return probes;
}

void write_text(const fs::path& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void dump_state(const fs::path& dir, const StateLayout& layout,
                const Eigen::VectorXd& state) {
  std::ostringstream txt;
  for (int i = 0; i < state.size(); ++i) txt << format_double(state[i]) << '\n';
  write_text(dir / "state.txt", txt.str());

  json fields = json::array();
  fields.push_back({{"name", "v"}, {"offset", layout.v_off}, {"count", layout.nv}});
  fields.push_back({{"name", "sigma"}, {"offset", layout.sigma_off}, {"count", layout.nsigma}});
  fields.push_back({{"name", "p"}, {"offset", layout.p_off}, {"count", layout.np}});
  for (int j = 0; j < layout.n_terms; ++j)
    fields.push_back({{"name", "psi" + std::to_string(j)},
                      {"offset", layout.psi_off(j)},
                      {"count", layout.npsi}});
  write_json(dir / "state_layout.json",
             json{{"total", layout.total}, {"fields", std::move(fields)}});
}

void maybe_export_ops(const json& cfg, const DiscreteOps& ops, const fs::path& dir) {
  if (!cfg.contains("grid") || !get_or(cfg.at("grid"), "export_ops", false)) return;
  auto dump = [&](const char* name, const SpMat& m) {
    std::ofstream out(dir / (std::string("ops_") + name + ".txt"));
    export_triplets(m, out);
  };
  dump("Gp", ops.Gp);
  dump("Dv", ops.Dv);
  dump("Gv", ops.Gv);
  dump("Ds", ops.Ds);
}

json field_norms(const StateLayout& layout, const DiscreteOps& ops,
                 const Eigen::VectorXd& state) {
  const Eigen::VectorXd w = layout.weights(ops);
  auto norm_of = [&](int off, int count) {
    double s = 0.0;
    for (int i = 0; i < count; ++i) s += w[off + i] * state[off + i] * state[off + i];
    return std::sqrt(s);
  };
  json out{{"v", norm_of(layout.v_off, layout.nv)},
           {"sigma", norm_of(layout.sigma_off, layout.nsigma)},
           {"p", norm_of(layout.p_off, layout.np)}};
  for (int j = 0; j < layout.n_terms; ++j)
    out["psi" + std::to_string(j)] = norm_of(layout.psi_off(j), layout.npsi);
  return out;
}

// ---- mode handlers -------------------------------------------------------

json do_fit(const json& cfg, const fs::path& config_dir, const fs::path& out_dir) {
  std::optional<MaterialParams> params;
  if (cfg.contains("material")) params = MaterialParams::from_json(cfg.at("material"));
  LoadedPermeability lp = load_permeability(cfg, params ? &*params : nullptr, config_dir);
  if (!lp.fit) throw ConfigError("mode fit requires permeability.samples_csv and .fit");
  write_json(out_dir / "series.json", lp.fit->series.to_json());
  json summary{{"residual", lp.fit->residual},
               {"iterations", lp.fit->iterations},
               {"n_terms", lp.fit->series.size()},
               {"warnings", lp.fit->warnings}};
  return summary;
}

json do_check(const json& cfg, const fs::path& config_dir, const fs::path& out_dir,
              bool quiet) {
  MaterialParams params = MaterialParams::from_json(cfg.at("material"));
  LoadedPermeability lp = load_permeability(cfg, &params, config_dir);
  if (!lp.series) throw ConfigError("mode check requires a permeability series");
  const json cj = cfg.contains("check") ? cfg.at("check") : json::object();
  const double nu0 = get_or(cj, "nu0", 1.0);
  const bool diag = get_or(cj, "convolution_diagnostic", false);
  int d = 1;
  if (cfg.contains("grid")) d = cfg.at("grid").at("d").get<int>();
  WellPosednessReport report = check_wellposedness(params, *lp.series, nu0, d, diag);
  write_json(out_dir / "report.json", report.to_json());
  if (!quiet) report.print_table(std::cout);
  json summary{{"holds", report.holds}, {"c_min", report.c_min}, {"nu0", nu0}};
  return summary;
}

json do_run_ade(const json& cfg, const fs::path& config_dir, const fs::path& out_dir) {
  MaterialParams params = MaterialParams::from_json(cfg.at("material"));
  LoadedPermeability lp = load_permeability(cfg, &params, config_dir);
  const Grid grid = load_grid(cfg);
  const MaterialLaw law = lp.series ? MaterialLaw(params, *lp.series, grid.d)
                                    : MaterialLaw(params, grid.d);
  const DiscreteOps ops = build_ops(grid);
  const StateLayout layout = StateLayout::make(grid, law.n_terms());
  SolverConfig scfg = load_solver(cfg, grid, layout);
  const std::vector<Probe> probes = load_probes(cfg);
  const Forcing forcing =
      Forcing::from_body_force(law, grid, layout, load_body_force(cfg, grid));

  SteppingOperator stepper = SteppingOperator::assemble(law, ops, grid, scfg);
  const Eigen::VectorXd init = initial_state(law, ops, grid, layout, scfg);
  Trajectory traj = run(stepper, layout, ops, scfg, forcing, probes, init);

  std::ostringstream csv;
  traj.write_csv(csv);
  write_text(out_dir / "trajectory.csv", csv.str());
  dump_state(out_dir, layout, traj.final_state);
  maybe_export_ops(cfg, ops, out_dir);

  json summary{{"steps", static_cast<int>(traj.times.size())},
               {"dt", scfg.dt},
               {"T", scfg.t_end},
               {"theta", scfg.theta},
               {"dofs", layout.total},
               {"n_terms", layout.n_terms},
               {"final_norms", field_norms(layout, ops, traj.final_state)}};
  return summary;
}

json do_run_conv(const json& cfg, const fs::path& config_dir, const fs::path& out_dir) {
  MaterialParams params = MaterialParams::from_json(cfg.at("material"));
  LoadedPermeability lp = load_permeability(cfg, &params, config_dir);
  const Grid grid = load_grid(cfg);
  const MaterialLaw law = lp.series ? MaterialLaw(params, *lp.series, grid.d)
                                    : MaterialLaw(params, grid.d);
  const DiscreteOps ops = build_ops(grid);
  const StateLayout layout = StateLayout::make(grid, law.n_terms());
  SolverConfig scfg = load_solver(cfg, grid, layout);

  ConvolutionConfig ccfg;
  ccfg.dt = scfg.dt;
  ccfg.t_end = scfg.t_end;
  ccfg.theta = scfg.theta;
  ccfg.u0 = scfg.u0;
  ccfg.v0 = scfg.v0;
  ccfg.p0 = scfg.p0;
  if (cfg.contains("solver"))
    ccfg.blowup_threshold = get_or(cfg.at("solver"), "blowup_threshold", ccfg.blowup_threshold);

  std::vector<Probe> probes;
  for (const auto& p : load_probes(cfg))
    if (p.kind != Probe::Kind::energy && (p.field == "u" || p.field == "p")) probes.push_back(p);
  if (probes.empty()) {
    probes.push_back({Probe::Kind::norm, "u", 0});
    probes.push_back({Probe::Kind::norm, "p", 0});
  }

  Trajectory traj =
      run_convolution(law, ops, grid, ccfg, load_body_force(cfg, grid), probes);
  std::ostringstream csv;
  traj.write_csv(csv);
  write_text(out_dir / "trajectory.csv", csv.str());
  maybe_export_ops(cfg, ops, out_dir);

  json summary{{"steps", static_cast<int>(traj.times.size())},
               {"dt", ccfg.dt},
               {"T", ccfg.t_end},
               {"final_u_norm", std::sqrt(traj.final_u.dot(traj.final_u))},
               {"final_p_norm", std::sqrt(traj.final_state.dot(traj.final_state))}};
  return summary;
}

json do_compare(const json& cfg, const fs::path& config_dir, const fs::path& out_dir) {
  MaterialParams params = MaterialParams::from_json(cfg.at("material"));
  LoadedPermeability lp = load_permeability(cfg, &params, config_dir);
  const Grid grid = load_grid(cfg);
  const MaterialLaw law = lp.series ? MaterialLaw(params, *lp.series, grid.d)
                                    : MaterialLaw(params, grid.d);
  const DiscreteOps ops = build_ops(grid);
  const StateLayout layout = StateLayout::make(grid, law.n_terms());
  const json cj = cfg.contains("compare") ? cfg.at("compare") : json::object();
  const int levels = get_or(cj, "levels", 3);
  SolverConfig base = load_solver(cfg, grid, layout);
  const BodyForce f = load_body_force(cfg, grid);

  std::vector<double> diffs, dts;
  for (int k = 0; k < levels; ++k) {
    SolverConfig scfg = base;
    scfg.dt = base.dt / static_cast<double>(1 << k);
    const Forcing forcing = Forcing::from_body_force(law, grid, layout, f);
    SteppingOperator stepper = SteppingOperator::assemble(law, ops, grid, scfg);
    RunOptions opt;
    opt.record_u = true;
    opt.record_p = true;
    const Eigen::VectorXd init = initial_state(law, ops, grid, layout, scfg);
    Trajectory ade = run(stepper, layout, ops, scfg, forcing, {}, init, opt);

    ConvolutionConfig ccfg;
    ccfg.dt = scfg.dt;
    ccfg.t_end = scfg.t_end;
    ccfg.theta = scfg.theta;
    ccfg.u0 = scfg.u0;
    ccfg.v0 = scfg.v0;
    ccfg.p0 = scfg.p0;
    Trajectory conv = run_convolution(law, ops, grid, ccfg, f, {}, opt);

    double max_diff = 0.0;
    const std::size_t steps = std::min(ade.u_history.size(), conv.u_history.size());
    for (std::size_t nstep = 0; nstep < steps; ++nstep) {
      const Eigen::VectorXd du = ade.u_history[nstep] - conv.u_history[nstep];
      const Eigen::VectorXd dp = ade.p_history[nstep] - conv.p_history[nstep];
      double s = 0.0;
      for (int i = 0; i < du.size(); ++i) s += ops.wv[i] * du[i] * du[i];
      for (int i = 0; i < dp.size(); ++i) s += ops.wc[i] * dp[i] * dp[i];
      max_diff = std::max(max_diff, std::sqrt(s));
    }
    diffs.push_back(max_diff);
    dts.push_back(scfg.dt);
  }

  std::ostringstream csv;
  csv << "level,dt,max_diff,order\n";
  json per_level = json::array();
  double order_sum = 0.0;
  for (int k = 0; k < levels; ++k) {
    const double order = k > 0 ? std::log2(diffs[k - 1] / diffs[k]) : 0.0;
    if (k > 0) order_sum += order;
    csv << k << ',' << format_double(dts[k]) << ',' << format_double(diffs[k]) << ','
        << format_double(order) << '\n';
    per_level.push_back({{"dt", dts[k]}, {"max_diff", diffs[k]}, {"order", order}});
  }
  write_text(out_dir / "convergence.csv", csv.str());

  json summary{{"levels", per_level},
               {"max_diff", diffs.back()},
               {"observed_order", levels > 1 ? order_sum / (levels - 1) : 0.0}};
  return summary;
}

json do_mms(const json& cfg, const fs::path& config_dir, const fs::path& out_dir) {
  MaterialParams params = MaterialParams::from_json(cfg.at("material"));
  LoadedPermeability lp = load_permeability(cfg, &params, config_dir);
  if (!lp.series) throw ConfigError("mode mms requires a permeability series");
  const json mj = cfg.at("mms");
  MmsStudyConfig mcfg;
  mcfg.case_name = mj.contains("case") ? mj.at("case").get<std::string>() : "trig";
  mcfg.d = get_or(mj, "d", 1);
  for (const auto& c : mj.at("cells")) mcfg.cells.push_back(c.get<int>());
  mcfg.extent = get_or(mj, "extent", 1.0);
  mcfg.dt0 = mj.at("dt0").get<double>();
  mcfg.t_end = get_or(mj, "T", 0.5);
  mcfg.theta = get_or(mj, "theta", 0.5);
  const std::string refine = mj.contains("refine") ? mj.at("refine").get<std::string>()
                                                   : "space_time";
  if (refine == "space_time")
    mcfg.mode = RefineMode::space_time;
  else if (refine == "time")
    mcfg.mode = RefineMode::time_only;
  else if (refine == "space")
    mcfg.mode = RefineMode::space_only;
  else
    throw ConfigError("mms.refine must be space_time, time or space");

  ConvergenceTable table = mms_study(params, *lp.series, mcfg);
  std::ostringstream csv;
  table.write_csv(csv);
  write_text(out_dir / "convergence.csv", csv.str());

  json rows = json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"cells", r.cells},
                    {"h", r.h},
                    {"dt", r.dt},
                    {"error", r.error},
                    {"order", r.order}});
  return json{{"observed_order", table.observed_order()},
              {"case", mcfg.case_name},
              {"refine", refine},
              {"rows", rows}};
}

json do_transfer(const json& cfg, const fs::path& config_dir, const fs::path& out_dir) {
  std::optional<MaterialParams> params;
  if (cfg.contains("material")) params = MaterialParams::from_json(cfg.at("material"));
  LoadedPermeability lp = load_permeability(cfg, params ? &*params : nullptr, config_dir);
  if (!lp.series) throw ConfigError("mode transfer requires a permeability series");
  const json tj = cfg.at("transfer");
  std::vector<double> omegas;
  if (tj.contains("omegas")) {
    for (const auto& w : tj.at("omegas")) omegas.push_back(w.get<double>());
  } else {
    const json& lr = tj.at("log_range");
    const double lo = lr.at("lo").get<double>();
    const double hi = lr.at("hi").get<double>();
    const int count = lr.at("count").get<int>();
    for (int i = 0; i < count; ++i)
      omegas.push_back(lo * std::pow(hi / lo, count > 1 ? i / double(count - 1) : 0.0));
  }
  const double theta = get_or(tj, "theta", 0.5);
  const double omega_dt = get_or(tj, "omega_dt", 0.05);
  if (omega_dt > 0.1)
    throw SolverError(SolverError::Code::resolution,
                      "transfer: omega_dt violates the guard omega*dt <= 0.1");

  std::ostringstream csv;
  csv << "omega,measured_re,measured_im,expected_re,expected_im,rel_err\n";
  double max_rel = 0.0;
  json rows = json::array();
  for (double w : omegas) {
    double c1 = lp.series->terms()[0].c;
    const double dt = w > 0.0 ? omega_dt / w : 0.05 * c1;
    const std::complex<double> measured = measure_ade_transfer(*lp.series, w, theta, dt);
    const std::complex<double> expected = lp.series->eval_hat(w);
    const double rel = std::abs(measured - expected) / std::abs(expected);
    max_rel = std::max(max_rel, rel);
    csv << format_double(w) << ',' << format_double(measured.real()) << ','
        << format_double(measured.imag()) << ',' << format_double(expected.real()) << ','
        << format_double(expected.imag()) << ',' << format_double(rel) << '\n';
    rows.push_back({{"omega", w}, {"rel_err", rel}});
  }
  write_text(out_dir / "transfer.csv", csv.str());
  return json{{"max_rel_err", max_rel}, {"rows", rows}, {"theta", theta}};
}

}  // namespace

int run_scenario(const std::string& config_path, const std::string& out_dir, bool quiet,
                 const std::string& forced_mode) {
  std::string text;
  {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "config error: cannot open " << config_path << "\n";
      return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }

  json cfg;
  try {
    cfg = json::parse(text);
  } catch (const json::parse_error& e) {
    std::cerr << "config error: " << config_path << ": " << locate_line(text, e.byte)
              << ": " << e.what() << "\n";
    return 2;
  }

  std::string mode = forced_mode;
  try {
    if (cfg.contains("mode")) {
      const std::string cfg_mode = cfg.at("mode").get<std::string>();
      if (!mode.empty() && mode != cfg_mode)
        throw ConfigError("mode '" + cfg_mode + "' in config conflicts with subcommand '" +
                          mode + "'");
      if (mode.empty()) mode = cfg_mode;
    }
    if (mode.empty()) throw ConfigError("no mode given (config 'mode' or subcommand)");

    const fs::path out(out_dir);
    fs::create_directories(out);
    const fs::path config_dir = fs::path(config_path).parent_path();

    json echoed = cfg;
    echoed["mode"] = mode;
    write_json(out / "config.json", echoed);

    json summary;
    if (mode == "fit")
      summary = do_fit(cfg, config_dir, out);
    else if (mode == "check")
      summary = do_check(cfg, config_dir, out, quiet);
    else if (mode == "ade")
      summary = do_run_ade(cfg, config_dir, out);
    else if (mode == "convolution")
      summary = do_run_conv(cfg, config_dir, out);
    else if (mode == "compare")
      summary = do_compare(cfg, config_dir, out);
    else if (mode == "mms")
      summary = do_mms(cfg, config_dir, out);
    else if (mode == "transfer")
      summary = do_transfer(cfg, config_dir, out);
    else
      throw ConfigError("unknown mode " + mode);

    summary["schema_version"] = 1;
    summary["mode"] = mode;
    summary["ok"] = true;
    summary["simd"] = kernels::isa_name(kernels::active_isa());
    write_json(out / "summary.json", summary);
    if (!quiet) std::cout << "wrote " << (out / "summary.json").string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const GridError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionMismatch& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FitError& e) {
    if (e.code() == FitError::Code::insufficient_samples) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace biot
