#include "caldet/linalg_ode.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace caldet {

namespace {

void check_finite(const Matrix& m, double u) {
  if (!m.allFinite()) {
    throw InputError("coefficient matrix has non-finite entries at u=" + std::to_string(u));
  }
}

}  // namespace

Matrix rk4_step(const CoefficientFn& coeff, double u, double h, const Matrix& y) {
  const Matrix m1 = coeff(u);
  const Matrix m2 = coeff(u + 0.5 * h);
  const Matrix m3 = coeff(u + h);
  check_finite(m1, u);
  const Matrix k1 = m1 * y;
  const Matrix k2 = m2 * (y + 0.5 * h * k1);
  const Matrix k3 = m2 * (y + 0.5 * h * k2);
  const Matrix k4 = m3 * (y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

FundamentalSolution fundamental_solution(const CoefficientFn& coeff, int steps) {
  if (steps < 16) throw InputError("fundamental_solution: steps must be >= 16");
  const int n = static_cast<int>(coeff(0.0).rows());
  if (coeff(0.0).cols() != n) throw InputError("fundamental_solution: coefficient must be square");

  std::vector<Matrix> nodes;
  nodes.reserve(steps + 1);
  Matrix phi = Matrix::Identity(n, n);
  nodes.push_back(phi);
  const double h = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    phi = rk4_step(coeff, k * h, h, phi);
    if (!phi.allFinite()) {
      throw NumericError("fundamental_solution: transport overflowed at u=" + std::to_string((k + 1) * h));
    }
    nodes.push_back(phi);
  }
  return FundamentalSolution(coeff, steps, std::move(nodes));
}

Matrix FundamentalSolution::at(double u) const {
  if (u <= 0.0) return nodes_.front();
  if (u >= 1.0) return nodes_.back();
  const double h = 1.0 / steps_;
  const int k = std::min(static_cast<int>(u * steps_), steps_ - 1);
  const double rem = u - k * h;
  if (rem < 1e-14) return nodes_[k];
  return rk4_step(coeff_, k * h, rem, nodes_[k]);
}

Matrix orthonormal_columns(const Matrix& columns, double rank_tol) {
  const int n = static_cast<int>(columns.cols());
  Eigen::JacobiSVD<Matrix> svd(columns, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(n - 1) < rank_tol * sv(0)) {
    throw InputError("orthonormal_columns: input vectors are rank deficient");
  }
  return svd.matrixU().leftCols(n);
}

Matrix orthoprojection(const Matrix& columns, double rank_tol) {
  const Matrix q = orthonormal_columns(columns, rank_tol);
  return q * q.adjoint();
}

Matrix orthoprojection(const std::vector<Vector>& span, double rank_tol) {
  if (span.empty()) throw InputError("orthoprojection: empty span");
  Matrix cols(span.front().size(), span.size());
  for (size_t j = 0; j < span.size(); ++j) cols.col(j) = span[j];
  return orthoprojection(cols, rank_tol);
}

Matrix range_basis(const Matrix& projection, int rank) {
  Eigen::JacobiSVD<Matrix> svd(projection, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(rank);
}

Matrix expm(const Matrix& a) { return a.exp(); }

Complex log_det(const Matrix& a) {
  Eigen::PartialPivLU<Matrix> lu(a);
  Complex logabs = 0.0;
  Complex phase = 1.0;
  const auto& u = lu.matrixLU();
  for (int i = 0; i < a.rows(); ++i) {
    const Complex d = u(i, i);
    logabs += std::log(std::abs(d));
    phase *= d / std::abs(d);
  }
  const double sign = lu.permutationP().determinant();
  phase *= sign;
  return logabs + Complex(0.0, std::arg(phase));
}

std::vector<double> simpson_weights(int n, double h) {
  std::vector<double> w(n + 1, 0.0);
  for (int k = 0; k + 2 <= n; k += 2) {
    w[k] += h / 3.0;
    w[k + 1] += 4.0 * h / 3.0;
    w[k + 2] += h / 3.0;
  }
  return w;
}

}  // namespace caldet
