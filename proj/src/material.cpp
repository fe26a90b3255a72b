#include "biot/material.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "biot/num_io.hpp"

namespace biot {

namespace {

int sigma_size(int d) { return d * (d + 1) / 2; }

int dim_from_sigma_size(int s) {
  for (int d = 1; d <= 3; ++d)
    if (sigma_size(d) == s) return d;
  return 0;
}

// Isotropic stiffness on stored components (xx, yy[, zz], off-diagonals
// once, tensor shear): sigma = 2 mu eps + lambda tr(eps) I.
Eigen::MatrixXd isotropic_stiffness_storage(double lambda, double mu, int d) {
  const int s = sigma_size(d);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(s, s);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) c(i, j) = lambda + (i == j ? 2.0 * mu : 0.0);
  for (int i = d; i < s; ++i) c(i, i) = 2.0 * mu;
  return c;
}

}  // namespace

void MaterialParams::validate() const {
  auto req = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("material: ") + what);
  };
  req(rho_s > 0.0, "rho_s must be positive");
  req(rho_f > 0.0, "rho_f must be positive");
  req(eta > 0.0, "eta must be positive");
  req(phi > 0.0 && phi < 1.0, "phi must lie in (0,1)");
  req(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0,1]");
  req(c0 > 0.0, "c0 must be positive");
  req(alpha_inf >= 1.0, "alpha_inf must be >= 1");
  if (const auto* iso = std::get_if<IsotropicElasticity>(&elasticity)) {
    req(iso->mu > 0.0, "mu must be positive");
  } else {
    const auto& kv = std::get<KelvinElasticity>(elasticity).stiffness;
    req(kv.rows() == kv.cols() && dim_from_sigma_size(static_cast<int>(kv.rows())) != 0,
        "Kelvin stiffness must be square of size d(d+1)/2");
    req(kv.isApprox(kv.transpose(), 1e-12), "Kelvin stiffness must be symmetric");
  }
}

PermeabilitySeries MaterialParams::make_series(std::vector<PermeabilityTerm> terms) const {
  return PermeabilitySeries(eta_k(), formation_factor(), std::move(terms));
}

Eigen::MatrixXd MaterialParams::stiffness_kelvin(int d) const {
  if (d < 1 || d > 3) throw DimensionMismatch("material: dimension must be 1, 2 or 3");
  const int s = sigma_size(d);
  if (const auto* iso = std::get_if<IsotropicElasticity>(&elasticity)) {
    // Kelvin and storage forms coincide for the isotropic (xx..) block;
    // shear entries are 2 mu in both scalings.
    Eigen::MatrixXd c = isotropic_stiffness_storage(iso->lambda, iso->mu, d);
    if (!(2.0 * iso->mu + d * iso->lambda > 0.0) || !(iso->mu > 0.0))
      throw std::invalid_argument("material: isotropic stiffness not positive definite");
    return c;
  }
  const auto& kv = std::get<KelvinElasticity>(elasticity).stiffness;
  if (static_cast<int>(kv.rows()) != s)
    throw DimensionMismatch("material: Kelvin stiffness has size " + std::to_string(kv.rows()) +
                            ", incompatible with dimension " + std::to_string(d));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kv, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("material: stiffness tensor not positive definite");
  return kv;
}

Eigen::MatrixXd MaterialParams::compliance_kelvin(int d) const {
  return stiffness_kelvin(d).inverse();
}

Eigen::MatrixXd MaterialParams::stiffness_storage(int d) const {
  Eigen::MatrixXd c = stiffness_kelvin(d);
  const int s = sigma_size(d);
  // D C D^{-1} with D = diag(1..1, sqrt(2)..): storage strain in, stored
  // stress out.
  for (int i = d; i < s; ++i) c.row(i) /= std::sqrt(2.0);
  for (int j = d; j < s; ++j) c.col(j) *= std::sqrt(2.0);
  return c;
}

Eigen::MatrixXd MaterialParams::compliance_storage(int d) const {
  return stiffness_storage(d).inverse();
}

double MaterialParams::compliance_min_eigenvalue(int d) const {
  if (const auto* iso = std::get_if<IsotropicElasticity>(&elasticity)) {
    const double bulk_like = 2.0 * iso->mu + d * iso->lambda;
    if (!(iso->mu > 0.0) || !(bulk_like > 0.0))
      throw std::invalid_argument("material: isotropic stiffness not positive definite");
    return 1.0 / std::max(2.0 * iso->mu, bulk_like);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(stiffness_kelvin(d), Eigen::EigenvaluesOnly);
  return 1.0 / es.eigenvalues().maxCoeff();
}

MaterialParams MaterialParams::from_json(const nlohmann::json& j) {
  MaterialParams p;
  p.rho_s = j.at("rho_s").get<double>();
  p.rho_f = j.at("rho_f").get<double>();
  p.phi = j.at("phi").get<double>();
  p.alpha = j.at("alpha").get<double>();
  p.c0 = j.at("c0").get<double>();
  p.eta = j.at("eta").get<double>();
  p.alpha_inf = j.at("alpha_inf").get<double>();
  const auto& el = j.at("elasticity");
  if (el.contains("lambda")) {
    p.elasticity = IsotropicElasticity{el.at("lambda").get<double>(), el.at("mu").get<double>()};
  } else if (el.contains("kelvin")) {
    const auto& rows = el.at("kelvin");
    const int s = static_cast<int>(rows.size());
    Eigen::MatrixXd m(s, s);
    for (int i = 0; i < s; ++i)
      for (int k = 0; k < s; ++k) m(i, k) = rows.at(i).at(k).get<double>();
    p.elasticity = KelvinElasticity{std::move(m)};
  } else {
    throw std::invalid_argument("material: elasticity needs either lambda/mu or kelvin");
  }
  p.validate();
  return p;
}

nlohmann::json MaterialParams::to_json() const {
  nlohmann::json el;
  if (const auto* iso = std::get_if<IsotropicElasticity>(&elasticity)) {
    el = {{"lambda", iso->lambda}, {"mu", iso->mu}};
  } else {
    const auto& kv = std::get<KelvinElasticity>(elasticity).stiffness;
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < kv.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int k = 0; k < kv.cols(); ++k) row.push_back(kv(i, k));
      rows.push_back(std::move(row));
    }
    el = {{"kelvin", std::move(rows)}};
  }
  return {{"rho_s", rho_s}, {"rho_f", rho_f},         {"phi", phi},
          {"alpha", alpha}, {"c0", c0},               {"eta", eta},
          {"alpha_inf", alpha_inf}, {"elasticity", std::move(el)}};
}

MaterialLaw::MaterialLaw(const MaterialParams& params, const PermeabilitySeries& series, int d)
    : d_(d), n_(series.size()), series_(series) {
  a_.resize(n_);
  b_.resize(n_);
  for (int j = 0; j < n_; ++j) {
    const auto& t = series.terms()[j];
    a_[j] = t.c * params.rho_f * series.formation_factor() / (t.d * series.eta_k());
    b_[j] = params.rho_f * series.formation_factor() / (t.d * series.eta_k());
  }
  build_blocks(params);
}

MaterialLaw::MaterialLaw(const MaterialParams& params, int d) : d_(d), n_(0) {
  build_blocks(params);
}

void MaterialLaw::build_blocks(const MaterialParams& params) {
  params.validate();
  if (d_ < 1 || d_ > 3) throw DimensionMismatch("material law: dimension must be 1, 2 or 3");
  rho_ = params.rho();
  rho_f_ = params.rho_f;
  c0_ = params.c0;
  eta_ = params.eta;
  alpha_ = params.alpha;
  c_s_ = params.compliance_min_eigenvalue(d_);
  s_kelvin_ = params.compliance_kelvin(d_);
  s_storage_ = params.compliance_storage(d_);
  c_storage_ = params.stiffness_storage(d_);

  const int s = sigma_components();
  const int bs = block_size();
  m0_ = Eigen::MatrixXd::Zero(bs, bs);
  m1_ = Eigen::MatrixXd::Zero(bs, bs);
  for (int i = 0; i < d_; ++i) m0_(i, i) = rho_;
  m0_.block(d_, d_, s, s) = s_kelvin_;
  m0_(d_ + s, d_ + s) = c0_;
  for (int j = 0; j < n_; ++j) {
    const int off = d_ + s + 1 + j * d_;
    for (int i = 0; i < d_; ++i) {
      m0_(off + i, off + i) = a_[j];
      m0_(i, off + i) = rho_f_;
      m0_(off + i, i) = rho_f_;
      m1_(off + i, off + i) = b_[j];
    }
  }
}

Eigen::MatrixXd MaterialLaw::sym_re_z_m(double nu) const { return nu * m0_ + m1_; }

Eigen::MatrixXd MaterialLaw::reduced_sym_re_z_m(double nu, bool per_term) const {
  const int s = sigma_components();
  const int bs = block_size();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(bs, bs);
  for (int i = 0; i < d_; ++i) r(i, i) = nu * rho_;
  r.block(d_, d_, s, s) = nu * s_kelvin_;
  r(d_ + s, d_ + s) = nu * c0_;
  for (int j = 0; j < n_; ++j) {
    const int off = d_ + s + 1 + j * d_;
    for (int i = 0; i < d_; ++i)
      r(off + i, off + i) = nu * (a_[j] - rho_f_ * rho_f_ / rho_) + b_[j];
  }
  if (!per_term) {
    // Exact congruent psi block: diag(a_j) - (rho_f^2/rho) ones ones^T,
    // replicated per spatial component.
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        if (j == k) continue;
        const int offj = d_ + s + 1 + j * d_;
        const int offk = d_ + s + 1 + k * d_;
        for (int i = 0; i < d_; ++i)
          r(offj + i, offk + i) = -nu * rho_f_ * rho_f_ / rho_;
      }
  }
  return r;
}

bool MaterialLaw::m0_positive_definite() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m0_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}

double MaterialLaw::m0_schur_margin() const {
  // rho - sum_j rho_f^2/a_j, i.e. rho - sum_j d_j eta/(c_j F).
  double occupied = 0.0;
  for (int j = 0; j < n_; ++j) occupied += rho_f_ * rho_f_ / a_[j];
  return rho_ - occupied;
}

MaterialLaw assemble_material_law(const MaterialParams& params,
                                  const PermeabilitySeries& series, int d) {
  return MaterialLaw(params, series, d);
}

double c_min(const MaterialLaw& law, const MaterialParams& params, double nu0) {
  if (!(nu0 > 0.0)) throw std::invalid_argument("c_min: nu0 must be positive");
  const double rho = params.rho();
  const double rho_f = params.rho_f;
  double value = std::min({nu0 * rho, nu0 * law.compliance_min_eigenvalue(), nu0 * params.c0});
  // rho_f^2 (nu0 (c_j F/(d_j eta) - 1/rho) + F/(d_j eta))
  //   == nu0 (a_j - rho_f^2/rho) + b_j.
  for (int j = 0; j < law.n_terms(); ++j)
    value = std::min(value, nu0 * (law.a(j) - rho_f * rho_f / rho) + law.b(j));
  return value;
}

WellPosednessReport check_wellposedness(const MaterialParams& params,
                                        const PermeabilitySeries& series, double nu0, int d,
                                        bool convolution_diagnostic) {
  if (!(nu0 > 0.0)) throw std::invalid_argument("check_wellposedness: nu0 must be positive");
  params.validate();
  WellPosednessReport report;
  report.nu0 = nu0;

  const double rho = params.rho();
  const double eta = params.eta;
  const double f_factor = series.formation_factor();

  double range_hi = std::numeric_limits<double>::infinity();
  for (const auto& t : series.terms()) {
    const double gain = f_factor / (t.d * eta);
    const double slope = t.c * f_factor / (t.d * eta) - 1.0 / rho;
    report.per_term_margins.push_back(nu0 * slope + gain);
    if (slope < 0.0) range_hi = std::min(range_hi, gain / (-slope));
  }
  report.nu0_range_lo = 0.0;
  report.nu0_range_unbounded = !std::isfinite(range_hi);
  report.nu0_range_hi = report.nu0_range_unbounded ? 0.0 : range_hi;

  if (const auto* kv = std::get_if<KelvinElasticity>(&params.elasticity))
    d = dim_from_sigma_size(static_cast<int>(kv->stiffness.rows()));
  MaterialLaw law(params, series, d);
  report.c_min = c_min(law, params, nu0);
  bool margins_ok = true;
  for (double m : report.per_term_margins) margins_ok = margins_ok && (m > 0.0);
  report.holds = margins_ok && report.c_min > 0.0;

  if (convolution_diagnostic) {
    double inf_re = std::numeric_limits<double>::infinity();
    auto probe = [&](double m) {
      const std::complex<double> w = series.eval_laplace({nu0, m});
      inf_re = std::min(inf_re, (1.0 / w).real());
    };
    probe(0.0);
    for (int k = 0; k <= 36; ++k) {
      const double m = std::pow(10.0, -3.0 + 0.25 * k);
      probe(m);
      probe(-m);
    }
    report.convolution_form_margin = inf_re - nu0 * params.rho_f / rho;
  }
  return report;
}

nlohmann::json WellPosednessReport::to_json() const {
  nlohmann::json j{{"nu0", nu0},
                   {"holds", holds},
                   {"c_min", c_min},
                   {"per_term_margins", per_term_margins}};
  if (nu0_range_unbounded)
    j["nu0_admissible_range"] = {{"lo", nu0_range_lo}, {"hi", nullptr}};
  else
    j["nu0_admissible_range"] = {{"lo", nu0_range_lo}, {"hi", nu0_range_hi}};
  if (convolution_form_margin) j["convolution_form_margin"] = *convolution_form_margin;
  return j;
}

void WellPosednessReport::print_table(std::ostream& out) const {
  out << "well-posedness check (nu0 = " << format_double(nu0) << ")\n";
  out << "  holds:  " << (holds ? "yes" : "no") << "\n";
  out << "  c_min:  " << format_double(c_min) << "\n";
  out << "  admissible nu0 range: (0, "
      << (nu0_range_unbounded ? std::string("inf") : format_double(nu0_range_hi)) << ")\n";
  for (std::size_t j = 0; j < per_term_margins.size(); ++j)
    out << "  term " << j + 1 << " margin: " << format_double(per_term_margins[j]) << "\n";
  if (convolution_form_margin)
    out << "  convolution-form margin: " << format_double(*convolution_form_margin) << "\n";
}

}  // namespace biot
