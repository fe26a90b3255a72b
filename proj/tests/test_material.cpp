#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "biot/material.hpp"
#include "oracles.hpp"

using namespace biot;

namespace {

// rho = 1, rho_f = 1, eta_k = 1 and unit storage; S = 1 via lambda+2mu = 1.
MaterialParams unit_params() {
  MaterialParams p;
  p.rho_s = 1.0;
  p.rho_f = 1.0;
  p.phi = 0.5;
  p.alpha = 0.9;
  p.c0 = 1.0;
  p.eta = 1.0;
  p.alpha_inf = 1.0;
  p.elasticity = IsotropicElasticity{0.3, 0.35};
  return p;
}

MaterialParams random_params(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MaterialParams p;
  p.rho_s = 0.5 + 2.5 * u(rng);
  p.rho_f = 0.5 + 2.5 * u(rng);
  p.phi = 0.2 + 0.6 * u(rng);
  p.alpha = 0.05 + 0.95 * u(rng);
  p.c0 = 0.1 + 4.9 * u(rng);
  p.eta = 0.1 + 1.9 * u(rng);
  p.alpha_inf = 1.0 + 2.0 * u(rng);
  p.elasticity = IsotropicElasticity{2.0 * u(rng), 0.2 + 1.8 * u(rng)};
  return p;
}

}  // namespace

TEST_CASE("assembled blocks match the reference layout for unit parameters") {
  const auto p = unit_params();
  const PermeabilitySeries series(1.0, 1.0, {{1.0, 1.0}});
  const MaterialLaw law = assemble_material_law(p, series, 1);
  REQUIRE(law.block_size() == 4);

  Eigen::MatrixXd m0_expect(4, 4);
  m0_expect << 1, 0, 0, 1,  //
      0, 1, 0, 0,           //
      0, 0, 1, 0,           //
      1, 0, 0, 1;
  CHECK((law.m0() - m0_expect).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::MatrixXd m1_expect = Eigen::MatrixXd::Zero(4, 4);
  m1_expect(3, 3) = 1.0;
  CHECK((law.m1() - m1_expect).cwiseAbs().maxCoeff() < 1e-15);

  CHECK((law.m0() - law.m0().transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-term law carries two auxiliary blocks coupled to v") {
  const auto p = unit_params();
  const PermeabilitySeries series(1.0, 1.0, {{0.5, 0.4}, {2.0, 0.7}});
  const MaterialLaw law(p, series, 1);
  REQUIRE(law.block_size() == 5);
  CHECK(law.m0()(0, 3) == doctest::Approx(1.0));  // rho_f coupling, term 1
  CHECK(law.m0()(0, 4) == doctest::Approx(1.0));  // rho_f coupling, term 2
  CHECK(law.m0()(3, 3) == doctest::Approx(law.a(0)));
  CHECK(law.m0()(4, 4) == doctest::Approx(law.a(1)));
  CHECK(law.m1()(3, 3) == doctest::Approx(law.b(0)));
  CHECK(law.m1()(4, 4) == doctest::Approx(law.b(1)));
  CHECK(law.m0()(3, 4) == 0.0);
}

TEST_CASE("c_min worked example") {
  // rho=2, c_s=1, c0=1, rho_f=1, F=1, eta=1, c1=d1=1, nu0=1 -> 1.
  MaterialParams p;
  p.rho_s = 3.0;
  p.rho_f = 1.0;
  p.phi = 0.5;  // rho = 0.5 + 1.5 = 2
  p.alpha = 0.9;
  p.c0 = 1.0;
  p.eta = 1.0;
  p.alpha_inf = 1.0;
  p.elasticity = IsotropicElasticity{0.3, 0.35};  // S = 1
  const PermeabilitySeries series(1.0, 1.0, {{1.0, 1.0}});
  const MaterialLaw law(p, series, 1);
  CHECK(c_min(law, p, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  // the psi term evaluates to rho_f^2(nu0(1 - 1/2) + 1) = 1.5
  CHECK(1.0 * (law.a(0) - 1.0 / 2.0) + law.b(0) == doctest::Approx(1.5));
}

TEST_CASE("c_min vanishes with nu0 and matches the per-term spectral oracle") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 40; ++trial) {
    auto p = random_params(rng);
    const double c = 0.05 + 5.0 * u(rng);
    const double d = 0.05 + 5.0 * u(rng);
    PermeabilitySeries series = p.make_series({{c, d}});
    const int dim = 1 + trial % 3;
    const MaterialLaw law(p, series, dim);
    // restrict to the regime where the infimum over Re z >= nu0 is attained
    // at nu0 (nonnegative per-term slope, i.e. M0 positive definite)
    if (law.m0_schur_margin() <= 0.0) continue;
    ++checked;
    const double nu0 = 0.1 + 5.0 * u(rng);
    const double closed = c_min(law, p, nu0);
    const double oracle = oracles::spectral_min_reduced(law, nu0, /*per_term=*/true);
    CHECK(std::abs(closed - oracle) <= 1e-10 * std::abs(closed));

    // nu0 -> 0+: every nu0-proportional term vanishes
    CHECK(c_min(law, p, 1e-13) < 1e-10);
  }
  CHECK(checked >= 40);
}

TEST_CASE("c_min is nondecreasing in nu0 when every slope is nonnegative") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 30; ++trial) {
    auto p = random_params(rng);
    PermeabilitySeries series =
        p.make_series({{0.05 + 5.0 * u(rng), 0.05 + 5.0 * u(rng)}});
    const MaterialLaw law(p, series, 1);
    if (law.m0_schur_margin() <= 0.0) continue;
    ++checked;
    double prev = c_min(law, p, 1e-3);
    for (double nu0 = 2e-3; nu0 < 20.0; nu0 *= 1.7) {
      const double cur = c_min(law, p, nu0);
      CHECK(cur >= prev);
      prev = cur;
    }
  }
  CHECK(checked >= 30);
}

TEST_CASE("closed-form constant can exceed the raw spectral minimum") {
  // Coupled v/psi block [[1,1],[1,3]] at nu0=1: smallest eigenvalue
  // 2-sqrt(2), while the per-term reduction gives min{1, 5, 5, 2} = 1.
  // The congruence preserves the signature, not the eigenvalues.
  MaterialParams p;
  p.rho_s = 1.0;
  p.rho_f = 1.0;
  p.phi = 0.5;  // rho = 1
  p.alpha = 0.9;
  p.c0 = 5.0;
  p.eta = 4.0;
  p.alpha_inf = 1.0;                             // F = 2
  p.elasticity = IsotropicElasticity{0.0, 0.1};  // S = 5 -> c_s = 5
  const PermeabilitySeries series = p.make_series({{2.0, 0.5}});
  const MaterialLaw law(p, series, 1);
  REQUIRE(law.a(0) == doctest::Approx(2.0));
  REQUIRE(law.b(0) == doctest::Approx(1.0));

  const double closed = c_min(law, p, 1.0);
  CHECK(closed == doctest::Approx(1.0));
  const double raw = oracles::spectral_min_raw(law, 1.0);
  CHECK(raw == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
  CHECK(raw < closed);
  // positivity status still agrees
  CHECK((closed > 0.0) == (raw > 0.0));
}

TEST_CASE("congruence preserves the positivity status of the law") {
  std::mt19937 rng(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    auto p = random_params(rng);
    const int n = 1 + trial % 3;
    std::vector<PermeabilityTerm> terms;
    for (int j = 0; j < n; ++j)
      terms.push_back({0.05 + 5.0 * u(rng), 0.05 + 5.0 * u(rng)});
    PermeabilitySeries series = p.make_series(terms);
    const MaterialLaw law(p, series, 1 + trial % 2);
    const double nu = 0.05 + 10.0 * u(rng);
    const bool raw_pd = oracles::positive_definite_at(law.sym_re_z_m(nu));
    const bool reduced_pd =
        oracles::positive_definite_at(law.reduced_sym_re_z_m(nu, /*per_term=*/false));
    CHECK(raw_pd == reduced_pd);
  }
}

TEST_CASE("well-posedness worked example with a violated margin") {
  // F/(d1 eta) = 1 and slope c1 F/(d1 eta) - 1/rho = -2: at nu0 = 1 the
  // margin is -1 and the admissible interval ends at 0.5.
  MaterialParams p;
  p.rho_s = 1.0 / 2.1;
  p.rho_f = 1.0 / 2.1;
  p.phi = 0.5;  // rho = 1/2.1
  p.alpha = 0.9;
  p.c0 = 1.0;
  p.eta = 1.0;
  p.alpha_inf = 1.0;  // F = 2
  p.elasticity = IsotropicElasticity{0.3, 0.35};
  const PermeabilitySeries series = p.make_series({{0.1, 2.0}});

  const auto report = check_wellposedness(p, series, 1.0);
  REQUIRE(report.per_term_margins.size() == 1);
  CHECK(report.per_term_margins[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_FALSE(report.holds);
  CHECK_FALSE(report.nu0_range_unbounded);
  CHECK(report.nu0_range_hi == doctest::Approx(0.5).epsilon(1e-12));

  // inside the admissible interval the condition holds
  const auto inside = check_wellposedness(p, series, 0.25);
  CHECK(inside.holds);
}

TEST_CASE("remark-3.7-style parameters hold for every nu0") {
  // c1 > d1, F >= 1, rho > 1, eta < 1.
  MaterialParams p;
  p.rho_s = 2.0;
  p.rho_f = 1.5;
  p.phi = 0.5;  // rho = 1.75
  p.alpha = 0.8;
  p.c0 = 0.5;
  p.eta = 0.5;
  p.alpha_inf = 1.0;  // F = 2
  p.elasticity = IsotropicElasticity{1.0, 1.0};
  const PermeabilitySeries series = p.make_series({{2.0, 1.0}});
  for (double nu0 : {0.1, 1.0, 10.0, 1e3}) {
    const auto report = check_wellposedness(p, series, nu0);
    CHECK(report.holds);
    CHECK(report.nu0_range_unbounded);
    CHECK(report.c_min > 0.0);
  }
}

TEST_CASE("holds is equivalent to a positive closed-form constant") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 80; ++trial) {
    auto p = random_params(rng);
    PermeabilitySeries series =
        p.make_series({{0.02 + 3.0 * u(rng), 0.02 + 6.0 * u(rng)}});
    const double nu0 = 0.05 + 8.0 * u(rng);
    const auto report = check_wellposedness(p, series, nu0);
    const MaterialLaw law(p, series, 1);
    CHECK(report.holds == (c_min(law, p, nu0) > 0.0));
  }
}

TEST_CASE("M0 positive definiteness tracks the Schur condition") {
  const auto p = unit_params();  // rho = 1, rho_f = 1, eta = 1, F = 2
  // single term: PD iff c F/(d eta) > 1/rho, i.e. 2c/d > 1
  {
    const PermeabilitySeries above = p.make_series({{0.6, 1.0}});
    const MaterialLaw law(p, above, 1);
    CHECK(law.m0_schur_margin() > 0.0);
    CHECK(law.m0_positive_definite());
  }
  {
    const PermeabilitySeries below = p.make_series({{0.4, 1.0}});
    const MaterialLaw law(p, below, 1);
    CHECK(law.m0_schur_margin() < 0.0);
    CHECK_FALSE(law.m0_positive_definite());
  }
  // two terms: each per-term condition holds (2c/d = 1.6 > 1) but the
  // joint Schur complement fails; positive definiteness is governed by
  // the sum over the terms.
  {
    const PermeabilitySeries pair = p.make_series({{0.4, 0.5}, {0.8, 1.0}});
    const MaterialLaw law(p, pair, 1);
    for (int j = 0; j < 2; ++j)
      CHECK(law.a(j) / (law.rho_f() * law.rho_f()) > 1.0 / law.rho());
    CHECK(law.m0_schur_margin() < 0.0);
    CHECK_FALSE(law.m0_positive_definite());
  }
}

TEST_CASE("kelvin tensor input reproduces the isotropic c_s") {
  MaterialParams iso = unit_params();
  iso.elasticity = IsotropicElasticity{1.3, 0.7};
  for (int d : {1, 2, 3}) {
    MaterialParams kv = iso;
    kv.elasticity = KelvinElasticity{iso.stiffness_kelvin(d)};
    CHECK(kv.compliance_min_eigenvalue(d) ==
          doctest::Approx(iso.compliance_min_eigenvalue(d)).epsilon(1e-12));
  }
  CHECK(iso.compliance_min_eigenvalue(2) == doctest::Approx(1.0 / (2 * 0.7 + 2 * 1.3)));
}

TEST_CASE("kelvin tensor of the wrong rank is rejected") {
  MaterialParams p = unit_params();
  p.elasticity = KelvinElasticity{p.stiffness_kelvin(2)};  // wrong comparison source
  const PermeabilitySeries series(1.0, 1.0, {{1.0, 1.0}});
  CHECK_THROWS_AS(MaterialLaw(p, series, 3), DimensionMismatch);
}

TEST_CASE("parameter validation") {
  auto p = unit_params();
  p.phi = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = unit_params();
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = unit_params();
  p.alpha_inf = 0.9;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = unit_params();
  p.elasticity = IsotropicElasticity{1.0, -0.5};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("report serialization carries the convolution diagnostic on request") {
  const auto p = unit_params();
  const PermeabilitySeries series = p.make_series({{1.0, 0.5}});
  const auto plain = check_wellposedness(p, series, 1.0);
  CHECK_FALSE(plain.convolution_form_margin.has_value());
  const auto with = check_wellposedness(p, series, 1.0, 1, true);
  REQUIRE(with.convolution_form_margin.has_value());
  const auto j = with.to_json();
  CHECK(j.contains("convolution_form_margin"));
  CHECK(j.at("holds").get<bool>() == with.holds);
}

TEST_CASE("material params json round trip") {
  auto p = unit_params();
  const auto j = p.to_json();
  const auto back = MaterialParams::from_json(j);
  CHECK(back.rho() == doctest::Approx(p.rho()));
  CHECK(back.eta_k() == doctest::Approx(p.eta_k()));
  CHECK(back.formation_factor() == doctest::Approx(p.formation_factor()));
}
