#include <doctest.h>

#include <random>

#include "caldet/operators.hpp"

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

Matrix random_unitary(int m, std::mt19937& rng) {
  std::normal_distribution<double> dist;
  Matrix g(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) g(i, j) = Complex(dist(rng), dist(rng));
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(m, m);
}

}  // namespace

TEST_SUITE_BEGIN("operators");

TEST_CASE("single factor d/du applied to u gives 1") {
  const ComposedOperator op = compose({scalar_factor(1.0, 0.0)});
  const SmoothFunction s = [](double u, int k) {
    Vector v(1);
    v(0) = k == 0 ? u : (k == 1 ? 1.0 : 0.0);
    return v;
  };
  CHECK(std::abs(apply(op, s, 0.3)(0) - 1.0) < 1e-14);
}

TEST_CASE("two factors (-i d/du)^2 act as -d^2/du^2 on sin(pi u)") {
  const ComposedOperator op = compose({scalar_factor(Complex(0, -1), 0.0),
                                       scalar_factor(Complex(0, -1), 0.0)});
  const SmoothFunction s = [](double u, int k) {
    Vector v(1);
    const double p = kPi;
    switch (k % 4) {
      case 0: v(0) = std::sin(p * u) * std::pow(p, k); break;
      case 1: v(0) = std::cos(p * u) * std::pow(p, k); break;
      case 2: v(0) = -std::sin(p * u) * std::pow(p, k); break;
      default: v(0) = -std::cos(p * u) * std::pow(p, k); break;
    }
    return v;
  };
  for (double u : {0.2, 0.5, 0.8}) {
    const Complex expected = kPi * kPi * std::sin(kPi * u);
    CHECK(std::abs(apply(op, s, u)(0) - expected) < 1e-10);
  }
}

TEST_CASE("symbol evaluation: (d/du + a) e^{ku} = (k+a) e^{ku}") {
  const Complex a(0.4, -0.2), k(1.3, 0.7);
  const ComposedOperator op = compose({scalar_factor(1.0, a)});
  const SmoothFunction s = [&](double u, int d) {
    Vector v(1);
    v(0) = std::pow(k, d) * std::exp(k * u);
    return v;
  };
  const double u = 0.6;
  const Complex expected = (k + a) * std::exp(k * u);
  CHECK(std::abs(apply(op, s, u)(0) - expected) < 1e-12);
}

TEST_CASE("dimension mismatch between factors is an input error") {
  std::mt19937 rng(5);
  DiracFactor f1 = scalar_factor(1.0, 0.0);
  DiracFactor f2 = make_dirac_factor(random_unitary(2, rng),
                                     Coefficient::constant(Matrix::Zero(2, 2)));
  CHECK_THROWS_AS(compose({f1, f2}), InputError);
}

TEST_CASE("non-unitary sigma is rejected") {
  CHECK_THROWS_AS(make_dirac_factor(scalar1(2.0), Coefficient::constant(scalar1(0.0))), InputError);
}

TEST_CASE("assemble_ode: r=1 scalar gives lambda - a") {
  const ComposedOperator op = compose({scalar_factor(1.0, Complex(0.3))});
  const Complex lambda(2.0, 1.0);
  const Matrix m = assemble_ode_at(hat_system(op, lambda), 0.5);
  CHECK(std::abs(m(0, 0) - (lambda - 0.3)) < 1e-14);
}

TEST_CASE("assemble_ode: r=2 trivial factors give [[0,1],[lambda,0]]") {
  const ComposedOperator op = compose({scalar_factor(1.0, 0.0), scalar_factor(1.0, 0.0)});
  const Complex lambda(3.0, -1.0);
  const Matrix m = assemble_ode_at(hat_system(op, lambda), 0.2);
  CHECK(std::abs(m(0, 0)) < 1e-14);
  CHECK(std::abs(m(0, 1) - 1.0) < 1e-14);
  CHECK(std::abs(m(1, 0) - lambda) < 1e-14);
  CHECK(std::abs(m(1, 1)) < 1e-14);
}

TEST_CASE("assemble_ode at lambda=0 has no top-feedback block") {
  std::mt19937 rng(9);
  const int m = 2;
  std::vector<DiracFactor> factors;
  std::normal_distribution<double> dist;
  for (int i = 0; i < 3; ++i) {
    Matrix a(m, m);
    for (int k = 0; k < m * m; ++k) a(k / m, k % m) = Complex(dist(rng), dist(rng));
    factors.push_back(make_dirac_factor(random_unitary(m, rng), Coefficient::constant(a)));
  }
  const ComposedOperator op = compose(factors);
  const Matrix m0 = assemble_ode_at(hat_system(op, 0.0), 0.4);
  const Matrix m1 = assemble_ode_at(hat_system(op, Complex(5.0, 2.0)), 0.4);
  // the lambda dependence sits only in the bottom-left feedback block
  CHECK(m0.block(2 * m, 0, m, m).norm() < 1e-14);
  Matrix diff = m1 - m0;
  diff.block(2 * m, 0, m, m).setZero();
  CHECK(diff.norm() < 1e-14);
}

TEST_CASE("boundary trace ordering and hand values") {
  SUBCASE("r=1 constant function") {
    const ComposedOperator op = compose({scalar_factor(Complex(0, -1), 0.0)});
    const SmoothFunction s = [](double, int k) {
      Vector v(1);
      v(0) = k == 0 ? 1.0 : 0.0;
      return v;
    };
    const Vector tr = boundary_trace(op, s);
    CHECK(tr.size() == 2);
    CHECK(std::abs(tr(0) - 1.0) < 1e-14);
    CHECK(std::abs(tr(1) - 1.0) < 1e-14);
  }
  SUBCASE("r=2 with D0 = d/du on s = u gives (0, 1, 1, 1)") {
    const ComposedOperator op = compose({scalar_factor(1.0, 0.0), scalar_factor(1.0, 0.0)});
    const SmoothFunction s = [](double u, int k) {
      Vector v(1);
      v(0) = k == 0 ? u : (k == 1 ? 1.0 : 0.0);
      return v;
    };
    const Vector tr = boundary_trace(op, s);
    CHECK(std::abs(tr(0) - 0.0) < 1e-14);
    CHECK(std::abs(tr(1) - 1.0) < 1e-14);
    CHECK(std::abs(tr(2) - 1.0) < 1e-14);
    CHECK(std::abs(tr(3) - 1.0) < 1e-14);
  }
  SUBCASE("zero function") {
    const ComposedOperator op = compose({scalar_factor(1.0, 0.2), scalar_factor(1.0, -0.1)});
    const SmoothFunction s = [](double, int) { return Vector::Zero(1).eval(); };
    CHECK(boundary_trace(op, s).norm() == 0.0);
  }
}

TEST_CASE("companion correspondence on random exponential-ansatz scenarios") {
  std::mt19937 rng(2024);
  std::normal_distribution<double> dist;
  std::uniform_int_distribution<int> rpick(1, 3), mpick(1, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const int r = rpick(rng);
    const int m = mpick(rng);
    std::vector<DiracFactor> factors;
    for (int i = 0; i < r; ++i) {
      Matrix a(m, m);
      for (int k = 0; k < m * m; ++k) a(k / m, k % m) = 0.5 * Complex(dist(rng), dist(rng));
      factors.push_back(make_dirac_factor(random_unitary(m, rng), Coefficient::constant(a)));
    }
    const ComposedOperator op = compose(factors);
    const Complex k(0.4 * dist(rng), 0.4 * dist(rng));

    // full symbol M_k = sigma_{r-1}(k + A_{r-1}) ... sigma_0 (k + A_0)
    Matrix symbol = Matrix::Identity(m, m);
    std::vector<Matrix> chain{Matrix::Identity(m, m)};
    for (int i = 0; i < r; ++i) {
      symbol = factors[i].sigma *
               (k * Matrix::Identity(m, m) + factors[i].coeff.at(0.0)) * symbol;
      chain.push_back(symbol);
    }
    Eigen::ComplexEigenSolver<Matrix> es(symbol);
    const Complex lambda = es.eigenvalues()(0);
    const Vector v = es.eigenvectors().col(0);

    // hat vector s_i(u) = e^{ku} chain_i v must satisfy s' = M_lambda s
    const HatSystem hat = hat_system(op, lambda);
    const int n = hat.N();
    Vector shat(n);
    const double u = 0.35;
    for (int i = 0; i < r; ++i) shat.segment(i * m, m) = std::exp(k * u) * (chain[i] * v);
    const Vector resid = assemble_ode_at(hat, u) * shat - k * shat;
    CHECK(resid.norm() < 1e-8 * std::max(1.0, shat.norm()));

    // integrating the assembled ODE reproduces the ansatz solution
    const auto phi = fundamental_solution(assemble_ode(hat), 1024);
    Vector s0(n);
    for (int i = 0; i < r; ++i) s0.segment(i * m, m) = chain[i] * v;
    const Vector end = phi.at_end() * s0;
    Vector expected(n);
    for (int i = 0; i < r; ++i) expected.segment(i * m, m) = std::exp(k) * (chain[i] * v);
    CHECK((end - expected).norm() < 1e-8 * expected.norm());
  }
}

TEST_CASE("hat_system r=2 exponential kernel element by direct substitution") {
  // D0 = D1 = d/du, lambda = k^2: s0 = e^{ku}, s1 = k e^{ku}
  const Complex k(0.8, 0.3);
  const ComposedOperator op = compose({scalar_factor(1.0, 0.0), scalar_factor(1.0, 0.0)});
  const HatSystem hat = hat_system(op, k * k);
  for (double u : {0.1, 0.9}) {
    Vector s(2);
    s << std::exp(k * u), k * std::exp(k * u);
    const Vector resid = assemble_ode_at(hat, u) * s - k * s;
    CHECK(resid.norm() < 1e-12);
  }
}

TEST_CASE("polynomial coefficients evaluate with derivatives") {
  Matrix c0 = scalar1(1.0), c1 = scalar1(Complex(0.0, 2.0)), c2 = scalar1(-3.0);
  const Coefficient c = Coefficient::polynomial({c0, c1, c2});
  CHECK(std::abs(c.at(0.5)(0, 0) - (1.0 + Complex(0.0, 1.0) - 0.75)) < 1e-14);
  CHECK(std::abs(c.derivative_at(0.5, 1)(0, 0) - (Complex(0.0, 2.0) - 3.0)) < 1e-14);
  CHECK(std::abs(c.derivative_at(0.5, 2)(0, 0) - (-6.0)) < 1e-14);
  CHECK(c.degree() == 2);
}

TEST_SUITE_END();
