#include "biot/permeability.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "biot/num_io.hpp"

namespace biot {

PermeabilitySeries::PermeabilitySeries(double eta_k, double formation_factor,
                                       std::vector<PermeabilityTerm> terms)
    : eta_k_(eta_k), formation_factor_(formation_factor), terms_(std::move(terms)) {
  if (!(eta_k_ > 0.0)) throw std::invalid_argument("permeability: eta_k must be positive");
  if (!(formation_factor_ >= 1.0))
    throw std::invalid_argument("permeability: formation factor must be >= 1");
  if (terms_.empty()) throw std::invalid_argument("permeability: at least one term required");
  for (const auto& t : terms_) {
    if (!(t.c > 0.0) || !(t.d > 0.0))
      throw std::invalid_argument("permeability: c_j and d_j must be positive");
  }
  std::sort(terms_.begin(), terms_.end(),
            [](const PermeabilityTerm& a, const PermeabilityTerm& b) { return a.c < b.c; });
}

std::complex<double> PermeabilitySeries::eval_hat(double omega) const {
  return eval_laplace(std::complex<double>(0.0, omega));
}

std::complex<double> PermeabilitySeries::eval_laplace(std::complex<double> z) const {
  std::complex<double> sum = 0.0;
  for (const auto& t : terms_) sum += t.d / (1.0 + z * t.c);
  return prefactor() * sum;
}

double PermeabilitySeries::kernel(double t) const {
  if (t < 0.0) throw std::domain_error("permeability kernel: t must be >= 0 (causal)");
  double sum = 0.0;
  for (const auto& term : terms_) sum += term.d / term.c * std::exp(-t / term.c);
  return prefactor() * sum;
}

double PermeabilitySeries::step_response(double t) const {
  double sum = 0.0;
  for (const auto& term : terms_) sum += term.d * (1.0 - std::exp(-t / term.c));
  return prefactor() * sum;
}

nlohmann::json PermeabilitySeries::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : terms_) terms.push_back({{"c", t.c}, {"d", t.d}});
  return {{"eta_k", eta_k_}, {"F", formation_factor_}, {"terms", std::move(terms)}};
}

PermeabilitySeries PermeabilitySeries::from_json(const nlohmann::json& j) {
  std::vector<PermeabilityTerm> terms;
  for (const auto& t : j.at("terms"))
    terms.push_back({t.at("c").get<double>(), t.at("d").get<double>()});
  return PermeabilitySeries(j.at("eta_k").get<double>(), j.at("F").get<double>(),
                            std::move(terms));
}

std::vector<FrequencySample> read_samples_csv(std::istream& in) {
  std::vector<FrequencySample> samples;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      std::string squashed;
      for (char ch : line)
        if (!std::isspace(static_cast<unsigned char>(ch))) squashed += ch;
      if (squashed != "omega,re,im")
        throw std::runtime_error("sample CSV: expected header 'omega,re,im'");
      continue;
    }
    std::istringstream row(line);
    std::string field;
    double vals[3];
    for (int k = 0; k < 3; ++k) {
      if (!std::getline(row, field, ',')) throw std::runtime_error("sample CSV: short row");
      vals[k] = std::stod(field);
    }
    samples.push_back({vals[0], {vals[1], vals[2]}});
  }
  return samples;
}

void write_samples_csv(std::ostream& out, std::span<const FrequencySample> samples) {
  out << "omega,re,im\n";
  for (const auto& s : samples)
    out << format_double(s.omega) << ',' << format_double(s.value.real()) << ','
        << format_double(s.value.imag()) << '\n';
}

namespace {

// Zeros of sigma(s) = 1 + sum_j s_j/(s + gamma_j): the eigenvalues of
// diag(-gamma) - ones * s^T.
Eigen::VectorXd relocated_poles(const Eigen::VectorXd& gamma, const Eigen::VectorXd& sres) {
  const int n = static_cast<int>(gamma.size());
  Eigen::MatrixXd h = (-gamma).asDiagonal();
  h.noalias() -= Eigen::VectorXd::Ones(n) * sres.transpose();
  Eigen::EigenSolver<Eigen::MatrixXd> es(h, /*computeEigenvectors=*/false);
  Eigen::VectorXd next(n);
  for (int j = 0; j < n; ++j) next[j] = std::abs(es.eigenvalues()[j].real());
  std::sort(next.data(), next.data() + n);
  // Keep poles distinct; coincident poles make the basis singular.
  for (int j = 1; j < n; ++j)
    if (next[j] <= next[j - 1] * (1.0 + 1e-10)) next[j] = next[j - 1] * (1.0 + 1e-6);
  return next;
}

}  // namespace

FitResult fit_series(std::span<const FrequencySample> samples, int n_terms,
                     const FitOptions& options) {
  if (n_terms < 1) throw std::invalid_argument("fit_series: n_terms must be >= 1");
  const int m = static_cast<int>(samples.size());
  if (m < 2 * n_terms)
    throw FitError(FitError::Code::insufficient_samples,
                   "fit_series: need at least 2*N samples, got " + std::to_string(m) +
                       " for N=" + std::to_string(n_terms));
  for (int i = 0; i < m; ++i) {
    if (!(samples[i].omega >= 0.0) || !std::isfinite(samples[i].omega))
      throw std::invalid_argument("fit_series: sample frequencies must be finite and >= 0");
    for (int k = i + 1; k < m; ++k)
      if (samples[i].omega == samples[k].omega)
        throw std::invalid_argument("fit_series: sample frequencies must be distinct");
  }

  const double prefactor = options.eta_k / options.formation_factor;
  const int n = n_terms;
  using Cx = std::complex<double>;

  // Work on h = A_hat/(eta_k/F) = sum r_j/(gamma_j + i w), r_j = d_j/c_j.
  Eigen::VectorXd omega(m);
  Eigen::VectorXcd h(m);
  Eigen::VectorXd row_weight(m);
  double target_norm2 = 0.0;
  for (int i = 0; i < m; ++i) {
    omega[i] = samples[i].omega;
    h[i] = samples[i].value / prefactor;
    row_weight[i] = 1.0 / std::max(std::abs(h[i]), 1e-300);
    target_norm2 += std::norm(samples[i].value);
  }

  // Initial poles: log-spaced over the sampled band.
  double wlo = std::numeric_limits<double>::infinity(), whi = 0.0;
  for (int i = 0; i < m; ++i) {
    if (omega[i] > 0.0) wlo = std::min(wlo, omega[i]);
    whi = std::max(whi, omega[i]);
  }
  if (!(whi > 0.0)) throw std::invalid_argument("fit_series: need at least one omega > 0");
  if (!std::isfinite(wlo) || wlo == whi) wlo = whi * 1e-3;
  Eigen::VectorXd gamma(n);
  for (int j = 0; j < n; ++j) {
    double f = (n == 1) ? 0.5 : static_cast<double>(j) / (n - 1);
    gamma[j] = wlo * std::pow(whi / wlo, f);
  }

  auto basis = [&](double w, double g) { return 1.0 / Cx(g, w); };

  int iterations = 0;
  bool converged = false;
  for (; iterations < options.max_iterations; ++iterations) {
    // Stage 1: residues of n(s) and of the scaling sigma(s), poles fixed.
    Eigen::MatrixXd a(2 * m, 2 * n);
    Eigen::VectorXd b(2 * m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        const Cx phi = basis(omega[i], gamma[j]) * row_weight[i];
        const Cx psi = -h[i] * basis(omega[i], gamma[j]) * row_weight[i];
        a(2 * i, j) = phi.real();
        a(2 * i + 1, j) = phi.imag();
        a(2 * i, n + j) = psi.real();
        a(2 * i + 1, n + j) = psi.imag();
      }
      b[2 * i] = (h[i] * row_weight[i]).real();
      b[2 * i + 1] = (h[i] * row_weight[i]).imag();
    }
    Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);
    Eigen::VectorXd sres = sol.tail(n);

    Eigen::VectorXd next = relocated_poles(gamma, sres);
    double movement = 0.0;
    for (int j = 0; j < n; ++j)
      movement = std::max(movement, std::abs(next[j] - gamma[j]) / std::abs(gamma[j]));
    gamma = next;
    if (movement < options.pole_tolerance) {
      converged = true;
      ++iterations;
      break;
    }
  }
  if (!converged)
    throw FitError(FitError::Code::diverged,
                   "fit_series: pole relocation did not converge within " +
                       std::to_string(options.max_iterations) + " iterations");

  // Stage 2: final residues with the converged poles, optionally pinning
  // the static limit sum r_j/gamma_j = static_limit/(eta_k/F).
  Eigen::VectorXd residues(n);
  if (options.static_limit) {
    const double h0 = *options.static_limit / prefactor;
    if (n == 1) {
      residues[0] = h0 * gamma[0];
    } else {
      const int nred = n - 1;
      Eigen::MatrixXd a(2 * m, nred);
      Eigen::VectorXd b(2 * m);
      for (int i = 0; i < m; ++i) {
        const Cx phin = basis(omega[i], gamma[n - 1]);
        for (int j = 0; j < nred; ++j) {
          const Cx col = (basis(omega[i], gamma[j]) - (gamma[n - 1] / gamma[j]) * phin) *
                         row_weight[i];
          a(2 * i, j) = col.real();
          a(2 * i + 1, j) = col.imag();
        }
        const Cx rhs = (h[i] - gamma[n - 1] * h0 * phin) * row_weight[i];
        b[2 * i] = rhs.real();
        b[2 * i + 1] = rhs.imag();
      }
      Eigen::VectorXd r = a.colPivHouseholderQr().solve(b);
      double acc = h0;
      for (int j = 0; j < nred; ++j) {
        residues[j] = r[j];
        acc -= r[j] / gamma[j];
      }
      residues[n - 1] = gamma[n - 1] * acc;
    }
  } else {
    Eigen::MatrixXd a(2 * m, n);
    Eigen::VectorXd b(2 * m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        const Cx phi = basis(omega[i], gamma[j]) * row_weight[i];
        a(2 * i, j) = phi.real();
        a(2 * i + 1, j) = phi.imag();
      }
      b[2 * i] = (h[i] * row_weight[i]).real();
      b[2 * i + 1] = (h[i] * row_weight[i]).imag();
    }
    residues = a.colPivHouseholderQr().solve(b);
  }

  std::vector<PermeabilityTerm> terms(n);
  for (int j = 0; j < n; ++j) {
    terms[j].c = 1.0 / gamma[j];
    terms[j].d = residues[j] / gamma[j];
    if (!(terms[j].c > 0.0) || !(terms[j].d > 0.0))
      throw FitError(FitError::Code::positivity_violated,
                     "fit_series: converged term " + std::to_string(j) +
                         " is not strictly positive (c=" + format_double(terms[j].c) +
                         ", d=" + format_double(terms[j].d) + ")");
  }

  FitResult result{PermeabilitySeries(options.eta_k, options.formation_factor, std::move(terms)),
                   0.0, iterations, {}};

  double misfit2 = 0.0;
  for (int i = 0; i < m; ++i)
    misfit2 += std::norm(result.series.eval_hat(omega[i]) - samples[i].value);
  result.residual = std::sqrt(misfit2 / std::max(target_norm2, 1e-300));

  if (options.relaxation_time_bound) {
    for (const auto& t : result.series.terms())
      if (t.c >= *options.relaxation_time_bound)
        result.warnings.push_back("relaxation time c=" + format_double(t.c) +
                                  " exceeds the principal viscous relaxation time bound " +
                                  format_double(*options.relaxation_time_bound));
  }
  return result;
}

}  // namespace biot
