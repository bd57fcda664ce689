#include "caldet/boundary.hpp"

#include <cmath>

#include "caldet/calderon.hpp"
#include "caldet/linalg_ode.hpp"

namespace caldet {

namespace {

int projection_rank(const Matrix& p) {
  // eigenvalues of a projection cluster at 0 and 1
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  int rank = 0;
  for (int i = 0; i < p.rows(); ++i) {
    if (es.eigenvalues()(i) > 0.5) ++rank;
  }
  return rank;
}

}  // namespace

BoundaryProjection make_projection(const Matrix& p, double tol) {
  if (p.rows() != p.cols()) throw InputError("projection must be square");
  const double idem = (p * p - p).norm();
  const double herm = (p - p.adjoint()).norm();
  if (idem > tol || herm > tol) {
    throw InputError("matrix is not a self-adjoint idempotent (|P^2-P|=" + std::to_string(idem) +
                     ", |P-P*|=" + std::to_string(herm) + ")");
  }
  return BoundaryProjection{p, projection_rank(p)};
}

BoundaryProjection projection_onto(const Matrix& columns) {
  return make_projection(orthoprojection(columns));
}

namespace {

Matrix nonneg_spectral_projection(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const int n = static_cast<int>(a.rows());
  Matrix p = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (es.eigenvalues()(i) >= -1e-12) {
      const Vector v = es.eigenvectors().col(i);
      p += v * v.adjoint();
    }
  }
  return p;
}

void require_self_adjoint(const Matrix& a, const char* which) {
  if ((a - a.adjoint()).norm() > 1e-10) {
    throw InputError(std::string("aps_projection: tangential operator at ") + which +
                     " is not self-adjoint");
  }
}

}  // namespace

BoundaryProjection aps_projection(const Matrix& tangential0, const Matrix& tangential1) {
  require_self_adjoint(tangential0, "u=0");
  require_self_adjoint(tangential1, "u=1");
  const int n = static_cast<int>(tangential0.rows());
  Matrix p = Matrix::Zero(2 * n, 2 * n);
  p.topLeftCorner(n, n) = nonneg_spectral_projection(tangential0);
  p.bottomRightCorner(n, n) = nonneg_spectral_projection(Matrix(-tangential1));
  return make_projection(p);
}

BoundaryProjection anti_aps_projection(const Matrix& tangential0, const Matrix& tangential1) {
  const BoundaryProjection aps = aps_projection(tangential0, tangential1);
  const int d = aps.dim();
  return make_projection(Matrix::Identity(d, d) - aps.matrix);
}

BoundaryProjection adjoint_condition(const BoundaryProjection& p, const Matrix& sigma_boundary) {
  const int d = p.dim();
  if (sigma_boundary.rows() != d || sigma_boundary.cols() != d) {
    throw InputError("adjoint_condition: sigma has wrong dimension");
  }
  if ((sigma_boundary * sigma_boundary.adjoint() - Matrix::Identity(d, d)).norm() > 1e-10) {
    throw InputError("adjoint_condition: sigma is not unitary");
  }
  const Matrix q = sigma_boundary * (Matrix::Identity(d, d) - p.matrix) * sigma_boundary.adjoint();
  return make_projection(q);
}

BoundaryProjection twisted_projection(double theta, int N) {
  const Complex phase = std::exp(Complex(0.0, -theta));
  Matrix cols = Matrix::Zero(2 * N, N);
  for (int k = 0; k < N; ++k) {
    cols(k, k) = phase;
    cols(N + k, k) = -1.0;
  }
  return projection_onto(cols);
}

BoundaryProjection dirichlet_projection(int r, int m) {
  if (r != 2) throw InputError("dirichlet preset is defined for r = 2");
  const int n = r * m;
  Matrix p = Matrix::Zero(2 * n, 2 * n);
  for (int k = 0; k < m; ++k) {
    p(k, k) = 1.0;
    p(n + k, n + k) = 1.0;
  }
  return make_projection(p);
}

BoundaryProjection neumann_projection(int r, int m) {
  if (r != 2) throw InputError("neumann preset is defined for r = 2");
  const int n = r * m;
  Matrix p = Matrix::Zero(2 * n, 2 * n);
  for (int k = 0; k < m; ++k) {
    p(m + k, m + k) = 1.0;
    p(n + m + k, n + m + k) = 1.0;
  }
  return make_projection(p);
}

WellPosedReport wellposed_check(const BoundaryProjection& p, const CalderonFrame& frame) {
  if (p.dim() != frame.basis.rows()) throw InputError("wellposed_check: dimension mismatch");
  WellPosedReport report;
  if (p.rank != frame.N) {
    // rank defect already rules out invertibility onto range(P)
    report.ok = false;
    report.singular_values.assign(frame.N, 0.0);
    return report;
  }
  const Matrix s = s_matrix(frame, p);
  Eigen::JacobiSVD<Matrix> svd(s);
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    report.singular_values.push_back(svd.singularValues()(i));
  }
  report.ok = report.smallest() > 1e-8;
  return report;
}

}  // namespace caldet
