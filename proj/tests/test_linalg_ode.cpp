#include <doctest.h>

#include <random>

#include "caldet/linalg_ode.hpp"

using namespace caldet;

namespace {

Matrix scalar1(Complex z) {
  Matrix m(1, 1);
  m(0, 0) = z;
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("linalg_ode");

TEST_CASE("zero coefficient gives the identity transport") {
  const auto sol = fundamental_solution([](double) { return Matrix::Zero(2, 2); }, 64);
  CHECK((sol.at(0.37) - Matrix::Identity(2, 2)).norm() < 1e-14);
  CHECK((sol.at_end() - Matrix::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("scalar coefficient integrates to the exponential") {
  const Complex a(0.7, -0.3);
  const auto sol = fundamental_solution([&](double) { return scalar1(a); }, 1024);
  CHECK(std::abs(sol.at_end()(0, 0) - std::exp(a)) < 1e-12);
  CHECK(std::abs(sol.at(0.5)(0, 0) - std::exp(0.5 * a)) < 1e-12);
}

TEST_CASE("rotation generator reproduces the closed-form matrix exponential") {
  // coefficient [[0,1],[-1,0]] has exp(u M) = [[cos u, sin u],[-sin u, cos u]]
  Matrix gen(2, 2);
  gen << 0.0, 1.0, -1.0, 0.0;
  const auto sol = fundamental_solution([&](double) { return gen; }, 1024);
  Matrix expected(2, 2);
  expected << std::cos(1.0), std::sin(1.0), -std::sin(1.0), std::cos(1.0);
  CHECK((sol.at_end() - expected).norm() < 1e-12);
}

TEST_CASE("Liouville determinant law holds for smooth coefficients") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    Matrix a0(3, 3), a1(3, 3);
    for (int i = 0; i < 9; ++i) {
      a0(i / 3, i % 3) = Complex(dist(rng), dist(rng));
      a1(i / 3, i % 3) = Complex(dist(rng), dist(rng));
    }
    const auto coeff = [&](double u) { return Matrix(a0 + u * a1); };
    const auto sol = fundamental_solution(coeff, 1024);
    // integral of tr coefficient: tr a0 + tr a1 / 2
    const Complex expected = std::exp(a0.trace() + 0.5 * a1.trace());
    const Complex det = sol.at_end().determinant();
    CHECK(std::abs(det - expected) < 1e-8);
  }
}

TEST_CASE("fourth-order refinement: doubling steps improves by at least 8x") {
  Matrix a0(2, 2), a1(2, 2);
  a0 << Complex(0.2, 0.4), Complex(-0.5, 0.1), Complex(0.3, -0.2), Complex(-0.1, 0.6);
  a1 << Complex(0.4, 0.0), Complex(0.2, -0.3), Complex(0.0, 0.5), Complex(-0.6, 0.1);
  const auto coeff = [&](double u) { return Matrix(a0 + std::sin(u) * a1); };
  const Matrix fine = fundamental_solution(coeff, 4096).at_end();
  const double err1 = (fundamental_solution(coeff, 128).at_end() - fine).norm();
  const double err2 = (fundamental_solution(coeff, 256).at_end() - fine).norm();
  CHECK(err1 / err2 >= 8.0);
}

TEST_CASE("non-finite coefficient entries are an input error") {
  const auto coeff = [](double) {
    Matrix m(1, 1);
    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    return m;
  };
  CHECK_THROWS_AS(fundamental_solution(coeff, 64), InputError);
}

TEST_CASE("steps below 16 are rejected") {
  CHECK_THROWS_AS(fundamental_solution([](double) { return Matrix::Zero(1, 1); }, 8), InputError);
}

TEST_CASE("orthoprojection onto a coordinate axis") {
  Vector v(2);
  v << 1.0, 0.0;
  const Matrix p = orthoprojection(std::vector<Vector>{v});
  Matrix expected(2, 2);
  expected << 1.0, 0.0, 0.0, 0.0;
  CHECK((p - expected).norm() < 1e-14);
}

TEST_CASE("orthoprojection onto the diagonal") {
  Vector v(2);
  v << 1.0, 1.0;
  const Matrix p = orthoprojection(std::vector<Vector>{v});
  Matrix expected(2, 2);
  expected << 0.5, 0.5, 0.5, 0.5;
  CHECK((p - expected).norm() < 1e-14);
}

TEST_CASE("random spans: projector matches a Gram-Schmidt oracle") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    Matrix cols(6, 3);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 3; ++j) cols(i, j) = Complex(dist(rng), dist(rng));
    }
    const Matrix p = orthoprojection(cols);
    CHECK((p * p - p).norm() < 1e-12);
    CHECK((p - p.adjoint()).norm() < 1e-12);
    // independent Gram-Schmidt construction of the same projector
    Matrix q = cols;
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
      q.col(j).normalize();
    }
    const Matrix p_gs = q * q.adjoint();
    CHECK((p - p_gs).norm() < 1e-10);
    // the projector fixes every input column
    CHECK((p * cols - cols).norm() < 1e-12);
  }
}

TEST_CASE("rank-deficient spans are rejected") {
  Matrix cols(3, 2);
  cols << 1.0, 2.0, 1.0, 2.0, 0.0, 0.0;
  CHECK_THROWS_AS(orthoprojection(cols), InputError);
}

TEST_SUITE_END();
