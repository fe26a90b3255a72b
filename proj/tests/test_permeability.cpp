#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "biot/permeability.hpp"
#include "oracles.hpp"

using namespace biot;

namespace {

PermeabilitySeries unit_series(std::vector<PermeabilityTerm> terms) {
  return PermeabilitySeries(1.0, 1.0, std::move(terms));
}

std::vector<FrequencySample> sample_series(const PermeabilitySeries& s, double wlo,
                                           double whi, int count) {
  std::vector<FrequencySample> out;
  for (int i = 0; i < count; ++i) {
    const double w = wlo * std::pow(whi / wlo, static_cast<double>(i) / (count - 1));
    out.push_back({w, s.eval_hat(w)});
  }
  return out;
}

}  // namespace

TEST_CASE("eval_hat closed values") {
  const auto s = unit_series({{1.0, 1.0}});
  CHECK(s.eval_hat(0.0).real() == doctest::Approx(1.0));
  CHECK(s.eval_hat(0.0).imag() == doctest::Approx(0.0));
  CHECK(s.eval_hat(1.0).real() == doctest::Approx(0.5));
  CHECK(s.eval_hat(1.0).imag() == doctest::Approx(-0.5));
}

TEST_CASE("eval_hat decays monotonically at high frequency") {
  const auto s = unit_series({{0.3, 2.0}, {4.0, 0.5}});
  double prev = std::abs(s.eval_hat(10.0));
  for (double w = 20.0; w < 1e6; w *= 2.0) {
    const double cur = std::abs(s.eval_hat(w));
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("conjugate symmetry and positive real part") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> cd(0.05, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = unit_series({{cd(rng), cd(rng)}, {cd(rng), cd(rng)}});
    std::uniform_real_distribution<double> wd(-1e3, 1e3);
    const double w = wd(rng);
    const auto plus = s.eval_hat(w);
    const auto minus = s.eval_hat(-w);
    CHECK(minus.real() == doctest::Approx(plus.real()).epsilon(1e-14));
    CHECK(minus.imag() == doctest::Approx(-plus.imag()).epsilon(1e-14));
    CHECK(plus.real() > 0.0);
  }
}

TEST_CASE("kernel value at zero matches the frequency-domain oracle") {
  const auto s = unit_series({{2.0, 3.0}});
  const double oracle = oracles::kernel_at_zero_from_frequency_data(
      [&](double w) { return s.eval_hat(w); });
  CHECK(s.kernel(0.0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(s.kernel(0.0) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("kernel is positive, strictly decreasing and decays") {
  const auto s = unit_series({{0.5, 1.0}, {3.0, 0.7}});
  double prev = s.kernel(0.0);
  CHECK(prev > 0.0);
  for (double t = 0.25; t < 60.0; t += 0.25) {
    const double cur = s.kernel(t);
    CHECK(cur > 0.0);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(s.kernel(200.0) < 1e-12);
  CHECK_THROWS_AS(s.kernel(-0.1), std::domain_error);
}

TEST_CASE("sampled kernel transforms back to eval_hat") {
  const auto s = unit_series({{0.4, 1.2}, {2.5, 0.6}});
  const double dt = 0.4 / 400.0;
  const double t_end = 2.5 * 45.0;
  for (double w : {0.0, 0.3, 1.0, 3.0}) {
    const auto hat = s.eval_hat(w);
    const auto dft =
        oracles::dft_of_kernel([&](double t) { return s.kernel(t); }, t_end, dt, w);
    CHECK(std::abs(dft - hat) / std::abs(hat) < 1e-4);
  }
}

TEST_CASE("step response equals quadrature of the kernel") {
  const auto s = unit_series({{0.7, 2.0}, {1.9, 0.3}});
  const double t = 1.7;
  const int n = 20000;
  const double dt = t / n;
  double acc = 0.5 * (s.kernel(0.0) + s.kernel(t));
  for (int m = 1; m < n; ++m) acc += s.kernel(m * dt);
  acc *= dt;
  CHECK(s.step_response(t) == doctest::Approx(acc).epsilon(1e-8));
}

TEST_CASE("series validation") {
  CHECK_THROWS_AS(unit_series({}), std::invalid_argument);
  CHECK_THROWS_AS(unit_series({{-1.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(unit_series({{1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(PermeabilitySeries(0.0, 1.0, {{1.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(PermeabilitySeries(1.0, 0.5, {{1.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("terms are canonicalized by ascending relaxation time") {
  const auto s = unit_series({{3.0, 1.0}, {0.5, 2.0}});
  CHECK(s.terms()[0].c == 0.5);
  CHECK(s.terms()[1].c == 3.0);
}

TEST_CASE("json round trip is exact") {
  const PermeabilitySeries s(0.731234567891234e-3, 2.5,
                             {{0.1234567890123456, 1.7}, {2.0, 0.3}});
  const auto j = s.to_json();
  const auto text = j.dump();
  const auto back = PermeabilitySeries::from_json(nlohmann::json::parse(text));
  CHECK(back.eta_k() == s.eta_k());
  CHECK(back.formation_factor() == s.formation_factor());
  for (int i = 0; i < s.size(); ++i) {
    CHECK(back.terms()[i].c == s.terms()[i].c);
    CHECK(back.terms()[i].d == s.terms()[i].d);
  }
}

TEST_CASE("sample csv round trip is exact") {
  std::vector<FrequencySample> samples{{0.0, {1.5, 0.0}},
                                       {0.3333333333333333, {0.25, -0.125}},
                                       {1e6, {1.23456789012345e-7, -4.5e-3}}};
  std::stringstream ss;
  write_samples_csv(ss, samples);
  const auto back = read_samples_csv(ss);
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(back[i].omega == samples[i].omega);
    CHECK(back[i].value == samples[i].value);
  }
}

TEST_CASE("fit recovers a known series from noiseless samples") {
  const auto truth = unit_series({{0.1, 0.5}, {2.0, 1.5}});
  const auto samples = sample_series(truth, 1e-2, 1e3, 20);
  const auto result = fit_series(samples, 2);
  REQUIRE(result.series.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(result.series.terms()[i].c ==
          doctest::Approx(truth.terms()[i].c).epsilon(1e-6));
    CHECK(result.series.terms()[i].d ==
          doctest::Approx(truth.terms()[i].d).epsilon(1e-6));
  }
  CHECK(result.residual < 1e-8);
}

TEST_CASE("fit honours the material prefactor") {
  const PermeabilitySeries truth(0.25, 2.0, {{0.8, 1.1}});
  const auto samples = sample_series(truth, 1e-2, 1e2, 12);
  FitOptions opt;
  opt.eta_k = 0.25;
  opt.formation_factor = 2.0;
  const auto result = fit_series(samples, 1, opt);
  CHECK(result.series.terms()[0].c == doctest::Approx(0.8).epsilon(1e-8));
  CHECK(result.series.terms()[0].d == doctest::Approx(1.1).epsilon(1e-8));
}

TEST_CASE("fit with too few samples reports insufficient data") {
  std::vector<FrequencySample> one{{0.0, {1.0, 0.0}}};
  try {
    fit_series(one, 1);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.code() == FitError::Code::insufficient_samples);
  }
}

TEST_CASE("fit tolerates relative noise within the residual bound") {
  const auto truth = unit_series({{0.2, 1.0}, {3.0, 0.8}});
  auto samples = sample_series(truth, 1e-2, 1e3, 24);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> noise(-1e-3, 1e-3);
  for (auto& s : samples) s.value *= std::complex<double>(1.0 + noise(rng), noise(rng));
  const auto result = fit_series(samples, 2);
  CHECK(result.residual <= 5e-3);
}

TEST_CASE("fit pins the static limit when asked") {
  const auto truth = unit_series({{0.5, 1.0}, {4.0, 0.7}});
  const auto samples = sample_series(truth, 1e-2, 1e2, 16);
  FitOptions opt;
  opt.static_limit = 1.7;  // = eval_hat(0) of the truth
  const auto result = fit_series(samples, 2, opt);
  CHECK(result.series.eval_hat(0.0).real() == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("fit reports positivity violations instead of clamping") {
  // Pole expansion with one negative residue: the pole pattern can be
  // matched but not with all-positive weights.
  std::vector<FrequencySample> samples;
  for (int i = 0; i < 16; ++i) {
    const double w = 1e-2 * std::pow(1e4, i / 15.0);
    const std::complex<double> iw(0.0, w);
    samples.push_back({w, 1.0 / (0.5 + iw) - 0.3 / (2.0 + iw)});
  }
  try {
    fit_series(samples, 2);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.code() == FitError::Code::positivity_violated);
  }
}

TEST_CASE("fit warns when a relaxation time exceeds the configured bound") {
  const auto truth = unit_series({{0.5, 1.0}});
  const auto samples = sample_series(truth, 1e-2, 1e2, 10);
  FitOptions opt;
  opt.relaxation_time_bound = 0.1;
  const auto result = fit_series(samples, 1, opt);
  REQUIRE(result.warnings.size() == 1);
}

TEST_CASE("laplace evaluation extends eval_hat") {
  const auto s = unit_series({{0.6, 1.4}});
  const double w = 2.3;
  const auto via_laplace = s.eval_laplace({0.0, w});
  const auto direct = s.eval_hat(w);
  CHECK(via_laplace.real() == doctest::Approx(direct.real()));
  CHECK(via_laplace.imag() == doctest::Approx(direct.imag()));
}
