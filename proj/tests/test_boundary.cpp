#include <doctest.h>

#include <random>

#include "caldet/boundary.hpp"
#include "caldet/calderon.hpp"

using namespace caldet;

namespace {

Matrix scalar1(Complex z) {
  Matrix m(1, 1);
  m(0, 0) = z;
  return m;
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
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

TEST_SUITE_BEGIN("boundary");

TEST_CASE("aps projection splits diagonal tangential operators by sign") {
  const BoundaryProjection p = aps_projection(diag2(1.0, -1.0), diag2(1.0, -1.0));
  // Pi_>=(diag(1,-1)) = diag(1,0); Pi_>=(-diag(1,-1)) = diag(0,1)
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 0) = 1.0;
  expected(3, 3) = 1.0;
  CHECK((p.matrix - expected).norm() < 1e-12);
  CHECK(p.rank == 2);
}

TEST_CASE("zero tangential operators put the zero modes on the >= side") {
  const BoundaryProjection p = aps_projection(Matrix::Zero(2, 2), Matrix::Zero(2, 2));
  CHECK((p.matrix - Matrix::Identity(4, 4)).norm() < 1e-12);
}

TEST_CASE("aps projection under a random unitary conjugation matches the spectral oracle") {
  std::mt19937 rng(31);
  const Matrix u = random_unitary(2, rng);
  const Matrix a0 = u * diag2(2.0, -3.0) * u.adjoint();
  const BoundaryProjection p = aps_projection(a0, diag2(1.0, -1.0));
  // spectral oracle: the block at u=0 must project onto the eigenvector of +2
  Eigen::SelfAdjointEigenSolver<Matrix> es(a0);
  Vector pos = es.eigenvectors().col(1);  // eigenvalues sorted ascending
  CHECK(std::abs(es.eigenvalues()(1) - 2.0) < 1e-12);
  const Matrix expected = pos * pos.adjoint();
  CHECK((p.matrix.topLeftCorner(2, 2) - expected).norm() < 1e-10);
}

TEST_CASE("aps output commutes with the spectral projections of its inputs") {
  std::mt19937 rng(77);
  const Matrix u = random_unitary(3, rng);
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 1.5;
  d(1, 1) = -0.5;
  d(2, 2) = 0.0;
  const Matrix a0 = u * d * u.adjoint();
  const Matrix a1 = diag2(0.7, -0.7);
  Matrix a1_3 = Matrix::Zero(3, 3);
  a1_3.topLeftCorner(2, 2) = a1;
  a1_3(2, 2) = 0.3;
  const BoundaryProjection p = aps_projection(a0, a1_3);
  Matrix big = Matrix::Zero(6, 6);
  big.topLeftCorner(3, 3) = a0;
  big.bottomRightCorner(3, 3) = -a1_3;
  CHECK((p.matrix * big - big * p.matrix).norm() < 1e-10);
}

TEST_CASE("non-self-adjoint tangential input is rejected") {
  Matrix bad(1, 1);
  bad(0, 0) = Complex(0.0, 1.0);
  CHECK_THROWS_AS(aps_projection(bad, scalar1(0.0)), InputError);
}

TEST_CASE("adjoint condition with identity sigma complements the projection") {
  const BoundaryProjection p = make_projection(diag2(1.0, 0.0));
  const BoundaryProjection q = adjoint_condition(p, Matrix::Identity(2, 2));
  CHECK((q.matrix - diag2(0.0, 1.0)).norm() < 1e-14);
}

TEST_CASE("adjoint condition with a swap sigma") {
  Matrix swap = Matrix::Zero(2, 2);
  swap(0, 1) = 1.0;
  swap(1, 0) = 1.0;
  const BoundaryProjection p = make_projection(diag2(1.0, 0.0));
  const BoundaryProjection q = adjoint_condition(p, swap);
  CHECK((q.matrix - diag2(1.0, 0.0)).norm() < 1e-14);
}

TEST_CASE("adjoint condition involution property") {
  std::mt19937 rng(11);
  const Matrix sigma = random_unitary(4, rng);
  Matrix cols(4, 2);
  std::normal_distribution<double> dist;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 2; ++j) cols(i, j) = Complex(dist(rng), dist(rng));
  }
  const BoundaryProjection p = projection_onto(cols);
  const BoundaryProjection q = adjoint_condition(p, sigma);
  // sigma^* (I - adjoint_condition(P, sigma)) sigma = P
  const Matrix back = sigma.adjoint() * (Matrix::Identity(4, 4) - q.matrix) * sigma;
  CHECK((back - p.matrix).norm() < 1e-12);
  const BoundaryProjection twice = adjoint_condition(q, sigma);
  CHECK(twice.rank == p.rank);
}

TEST_CASE("non-unitary sigma is rejected") {
  const BoundaryProjection p = make_projection(diag2(1.0, 0.0));
  CHECK_THROWS_AS(adjoint_condition(p, Matrix(2.0 * Matrix::Identity(2, 2))), InputError);
}

TEST_CASE("twisted projection encodes s(1) = e^{i theta} s(0)") {
  const double theta = 0.9;
  const BoundaryProjection p = twisted_projection(theta, 1);
  CHECK(p.rank == 1);
  Vector trace(2);
  trace << 1.0, std::exp(Complex(0.0, theta));
  CHECK((p.matrix * trace).norm() < 1e-13);
}

TEST_CASE("wellposed check against the Calderon projection itself") {
  Matrix sigma = scalar1(Complex(0.0, -1.0));
  const auto op = compose({make_dirac_factor(sigma, Coefficient::constant(scalar1(0.0)))});
  const CalderonFrame frame = calderon_frame(hat_system(op, 0.0));
  const BoundaryProjection calderon = make_projection(frame.projection);
  const WellPosedReport ok = wellposed_check(calderon, frame);
  CHECK(ok.ok);
  CHECK(std::abs(ok.smallest() - 1.0) < 1e-12);

  const BoundaryProjection complement =
      make_projection(Matrix(Matrix::Identity(2, 2) - frame.projection));
  const WellPosedReport bad = wellposed_check(complement, frame);
  CHECK(!bad.ok);
  CHECK(bad.smallest() < 1e-12);
}

TEST_CASE("wellposed diagnostics for d/du + a against the rank-one formula") {
  const double a = 0.8;
  const auto op = compose({make_dirac_factor(scalar1(1.0), Coefficient::constant(scalar1(a)))});
  const CalderonFrame frame = calderon_frame(hat_system(op, 0.0));
  const BoundaryProjection aps = aps_projection(scalar1(a), scalar1(a));
  // aps for a > 0 is the condition s(0) = 0
  CHECK((aps.matrix - diag2(1.0, 0.0)).norm() < 1e-12);
  const WellPosedReport report = wellposed_check(aps, frame);
  CHECK(report.ok);
  // brute force on the 2x2 model: K = span (1, e^{-a}), S = <e_0, k-hat>
  const double expected = 1.0 / std::sqrt(1.0 + std::exp(-2.0 * a));
  CHECK(std::abs(report.smallest() - expected) < 1e-10);
}

TEST_SUITE_END();
