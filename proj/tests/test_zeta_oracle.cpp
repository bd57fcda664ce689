#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "caldet/zeta_oracle.hpp"

using namespace caldet;

namespace {

Matrix scalar1(Complex z) {
  Matrix m(1, 1);
  m(0, 0) = z;
  return m;
}

DiracFactor scalar_factor(Complex sigma, Complex a) {
  return make_dirac_factor(scalar1(sigma), Coefficient::constant(scalar1(a)));
}

ComposedOperator neg_i_d_du() { return compose({scalar_factor(Complex(0, -1), 0.0)}); }
ComposedOperator laplace() {
  return compose({scalar_factor(Complex(0, -1), 0.0), scalar_factor(Complex(0, -1), 0.0)});
}

std::vector<double> twisted_eigs(double theta, int count) {
  // (theta + 2 pi n)^2 sorted ascending over n in Z
  std::vector<double> mu;
  for (int n = -count; n <= count; ++n) mu.push_back(std::abs(theta + 2.0 * kPi * n));
  std::sort(mu.begin(), mu.end());
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(mu[i] * mu[i]);
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("zeta_oracle");

TEST_CASE("hurwitz zeta special values") {
  // zeta_H(0, a) = 1/2 - a
  for (double a : {0.25, 1.0, 2.7}) {
    CHECK(std::abs(hurwitz_zeta(Complex(0.0), a) - (0.5 - a)) < 1e-12);
  }
  // zeta_R(2) = pi^2/6, zeta_R(0) = -1/2, zeta_R(4) = pi^4/90
  CHECK(std::abs(riemann_zeta(2.0) - kPi * kPi / 6.0) < 1e-12);
  CHECK(std::abs(riemann_zeta(0.0) - (-0.5)) < 1e-12);
  CHECK(std::abs(riemann_zeta(4.0) - std::pow(kPi, 4) / 90.0) < 1e-12);
  // direct sum comparison at s = 3
  Complex direct = 0.0;
  for (int k = 0; k < 200000; ++k) direct += std::pow(Complex(0.75 + k), -3.0);
  CHECK(std::abs(hurwitz_zeta(3.0, 0.75) - direct) < 1e-9);
}

TEST_CASE("hurwitz zeta derivative at 0 matches log Gamma") {
  for (double a : {0.3, 1.0, 1.9}) {
    const ZetaPair z = hurwitz_zeta_with_ds(Complex(0.0), a);
    const double expected = std::lgamma(a) - 0.5 * std::log(2.0 * kPi);
    CHECK(std::abs(z.ds - expected) < 1e-12);
  }
}

TEST_CASE("twisted first-order spectrum in a symmetric window") {
  const double theta = 1.1;
  OracleProblem prob{neg_i_d_du(), twisted_projection(theta, 1), false, {}};
  const SpectrumWindow w = enumerate_spectrum(prob, -20.0, 20.0);
  CHECK(w.complete);
  REQUIRE(w.eigenvalues.size() == 7);
  for (int n = -3; n <= 3; ++n) {
    CHECK(std::abs(w.eigenvalues[n + 3] - (theta + 2.0 * kPi * n)) < 1e-9);
    CHECK(w.multiplicities[n + 3] == 1);
  }
}

TEST_CASE("Dirichlet Laplacian spectrum n^2 pi^2") {
  OracleProblem prob{laplace(), dirichlet_projection(2, 1), true, {}};
  const SpectrumWindow w = enumerate_spectrum(prob, 0.0, 420.0);
  CHECK(w.complete);
  REQUIRE(w.eigenvalues.size() == 6);  // (n pi)^2 <= 420 for n = 1..6
  for (int n = 1; n <= 6; ++n) {
    CHECK(std::abs(w.eigenvalues[n - 1] - n * n * kPi * kPi) < 1e-8 * n * n);
  }
  CHECK(!w.has_zero_mode);
}

TEST_CASE("Neumann Laplacian detects the zero mode and refuses zeta calls") {
  OracleProblem prob{laplace(), neumann_projection(2, 1), true, {}};
  const SpectrumWindow w = enumerate_spectrum(prob, 0.0, 100.0);
  CHECK(w.has_zero_mode);
  CHECK(w.zero_mode_dim == 1);
  CHECK(kernel_dimension(prob) == 1);
  // downstream zeta calls on a spectrum containing 0 are rejected
  std::vector<double> with_zero = {0.0, kPi * kPi};
  std::vector<int> mult = {1, 1};
  CHECK_THROWS_AS(zeta_values(with_zero, mult, 2, {Complex(1.0)}), InputError);
}

TEST_CASE("periodic Laplacian (twisted theta=0) has double eigenvalues") {
  OracleProblem prob{laplace(), twisted_projection(0.0, 2), true, {}};
  const SpectrumWindow w = enumerate_spectrum(prob, 0.0, 200.0);
  CHECK(w.complete);
  CHECK(w.has_zero_mode);
  CHECK(w.zero_mode_dim == 1);
  REQUIRE(w.eigenvalues.size() >= 2);
  CHECK(std::abs(w.eigenvalues[0] - 4.0 * kPi * kPi) < 1e-7);
  CHECK(w.multiplicities[0] == 2);
}

TEST_CASE("Basel sum: zeta(1) of the Dirichlet spectrum is 1/6") {
  std::vector<double> eigs;
  std::vector<int> mult;
  for (int n = 1; n <= 200; ++n) {
    eigs.push_back(n * n * kPi * kPi);
    mult.push_back(1);
  }
  const ZetaReport report = zeta_values(eigs, mult, 2, {Complex(1.0)});
  CHECK(std::abs(report.zeta_samples[0] - Complex(1.0 / 6.0)) < 1e-10);
}

TEST_CASE("twisted spectrum zeta spot value at s=2 against direct summation") {
  const double theta = 0.9;
  const auto eigs = twisted_eigs(theta, 200);
  std::vector<int> mult(eigs.size(), 1);
  const ZetaReport report = zeta_values(eigs, mult, 2, {Complex(2.0)});
  Complex direct = 0.0;
  for (int n = -300000; n <= 300000; ++n) direct += std::pow(theta + 2.0 * kPi * n, -4.0);
  CHECK(std::abs(report.zeta_samples[0] - direct) < 1e-10);
}

TEST_CASE("single eigenvalue with no tail gives c^{-s}") {
  ZetaOptions opts;
  opts.use_tail = false;
  const ZetaReport report = zeta_values({3.7}, {1}, 1, {Complex(0.5), Complex(2.0)}, opts);
  CHECK(std::abs(report.zeta_samples[0] - std::pow(3.7, -0.5)) < 1e-13);
  CHECK(std::abs(report.zeta_samples[1] - std::pow(3.7, -2.0)) < 1e-13);
  const ZetaReport full = zeta_det(report, {3.7}, {1}, 1, opts);
  CHECK(std::abs(full.det_zeta - 3.7) < 1e-9);
}

TEST_CASE("zeta determinant of the Dirichlet Laplacian is 2") {
  std::vector<double> eigs;
  std::vector<int> mult;
  for (int n = 1; n <= 200; ++n) {
    eigs.push_back(n * n * kPi * kPi);
    mult.push_back(1);
  }
  const ZetaReport report = spectral_zeta_det(eigs, mult, 2);
  CHECK(std::abs(report.det_zeta - 2.0) < 1e-7);
  // zeta(0) = zeta_R(0) = -1/2 for this spectrum
  CHECK(std::abs(report.zeta_at_zero - (-0.5)) < 1e-7);
}

TEST_CASE("zeta determinants of twisted Laplacians: 4 sin^2(theta/2)") {
  for (double theta : {kPi, 0.5 * kPi}) {
    const auto eigs = twisted_eigs(theta, 240);
    std::vector<int> mult(eigs.size(), 1);
    const ZetaReport report = spectral_zeta_det(eigs, mult, 2);
    const double expected = 4.0 * std::pow(std::sin(0.5 * theta), 2);
    CHECK(std::abs(report.det_zeta - expected) < 1e-6);
    CHECK(std::abs(report.zeta_at_zero) < 1e-7);  // zeta(0) = 0 here
  }
}

TEST_CASE("zeta(0) equality for the twisted pair") {
  const auto e1 = twisted_eigs(0.5 * kPi, 220);
  const auto e2 = twisted_eigs(kPi / 3.0, 220);
  std::vector<int> mult(e1.size(), 1);
  const ZetaReport r1 = spectral_zeta_det(e1, mult, 2);
  const ZetaReport r2 = spectral_zeta_det(e2, mult, 2);
  CHECK(std::abs(r1.zeta_at_zero - r2.zeta_at_zero) < 1e-7);
}

TEST_CASE("head/tail split stability under shifting the split by 20") {
  const auto eigs = twisted_eigs(0.8, 240);
  std::vector<int> mult(eigs.size(), 1);
  const ZetaReport full = spectral_zeta_det(eigs, mult, 2);
  std::vector<double> shorter(eigs.begin(), eigs.end() - 20);
  std::vector<int> mult2(shorter.size(), 1);
  const ZetaReport less = spectral_zeta_det(shorter, mult2, 2);
  CHECK(std::abs(full.zeta_prime_at_zero - less.zeta_prime_at_zero) < 1e-7);
}

TEST_CASE("window growth stability of zeta'(0)") {
  OracleProblem prob{laplace(), dirichlet_projection(2, 1), true, {}};
  const SpectrumWindow w1 = enumerate_count(prob, 150);
  const SpectrumWindow w2 = enumerate_spectrum(prob, 0.0, 4.0 * w1.window_max);
  const ZetaReport r1 = spectral_zeta_det(w1.eigenvalues, w1.multiplicities, 2);
  const ZetaReport r2 = spectral_zeta_det(w2.eigenvalues, w2.multiplicities, 2);
  CHECK(std::abs(r1.zeta_prime_at_zero - r2.zeta_prime_at_zero) < 1e-7);
}

TEST_CASE("Weyl tail fit: interleaved classes of the twisted spectrum") {
  const auto eigs = twisted_eigs(0.7, 160);
  const WeylTailModel model = fit_weyl_tail(eigs, 2);
  CHECK(model.period == 2);
  CHECK(model.residual < 1e-9);  // exact arithmetic progressions per class
  CHECK(std::abs(model.classes[0].a - 2.0 * kPi) < 1e-8);
  CHECK(std::abs(model.classes[1].a - 2.0 * kPi) < 1e-8);
}

TEST_CASE("Weyl tail fit residual decays for Robin-type spectra") {
  // eigenvalues k^2 with k_n from tan k = -k/a: k_n ~ (n + 1/2) pi asymptote
  const double a = 0.3;
  std::vector<double> eigs;
  for (int n = 1; n <= 160; ++n) {
    double k = (n + 0.5) * kPi;
    for (int it = 0; it < 60; ++it) k = (n + 0.5) * kPi - std::atan(a / k);
    eigs.push_back(k * k);
  }
  const WeylTailModel model = fit_weyl_tail(eigs, 2);
  CHECK(model.residual < 1e-5);
}

TEST_SUITE_END();
