#pragma once

#include <vector>

#include "caldet/types.hpp"

namespace caldet {

struct CalderonFrame;  // calderon.hpp

// Boundary condition: self-adjoint idempotent on the 2N-dimensional trace
// space.  Well-posed conditions have rank N.
struct BoundaryProjection {
  Matrix matrix;
  int rank = 0;
  int dim() const { return static_cast<int>(matrix.rows()); }
};

// Validates idempotency and self-adjointness to tol and computes the rank.
BoundaryProjection make_projection(const Matrix& p, double tol = 1e-10);

// Projection onto the span of the given columns.
BoundaryProjection projection_onto(const Matrix& columns);

// APS projection Pi_>=(A0) (+) Pi_>=(-A1) on the 2N trace space.  Both inputs
// must be self-adjoint; eigenvalues that are exactly zero join the
// non-negative block.  The sign flip at u=1 is the inward-normal convention.
BoundaryProjection aps_projection(const Matrix& tangential0, const Matrix& tangential1);

// Complement convention: Pi_<(A0) (+) Pi_<(-A1).
BoundaryProjection anti_aps_projection(const Matrix& tangential0, const Matrix& tangential1);

// sigma (I - P) sigma^* for a 2N x 2N unitary sigma.
BoundaryProjection adjoint_condition(const BoundaryProjection& p, const Matrix& sigma_boundary);

// Twisted condition: projection onto span{(e^{-i theta} e_k, -e_k)/sqrt(2)},
// k = 0..N-1.  P gamma s = 0 is the relation s(1) = e^{i theta} s(0)
// componentwise, so the eigenvalue equation of -i d/du is e^{i lambda} = e^{i theta}.
BoundaryProjection twisted_projection(double theta, int N);

// Dirichlet on the s_0-components at both endpoints (rank N for r = 2).
BoundaryProjection dirichlet_projection(int r, int m);
// Complement: condition on the s_1-components (Neumann-type for r = 2).
BoundaryProjection neumann_projection(int r, int m);

struct WellPosedReport {
  bool ok = false;
  std::vector<double> singular_values;  // of S(P) in orthonormal bases
  double smallest() const { return singular_values.empty() ? 0.0 : singular_values.back(); }
};

// True iff the matrix of S(P) = P o P(D-hat) restricted to the Calderon
// space is invertible with smallest singular value > 1e-8.
WellPosedReport wellposed_check(const BoundaryProjection& p, const CalderonFrame& frame);

}  // namespace caldet
