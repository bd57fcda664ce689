#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "caldet/boundary.hpp"
#include "caldet/linalg_ode.hpp"
#include "caldet/operators.hpp"
#include "caldet/types.hpp"

namespace caldet {

struct TransportOptions {
  int steps = 1024;          // fine grid for integration / quadrature
  bool force_rk4 = false;    // skip the matrix-exponential path for constant systems
  double renorm_threshold = 1e3;
  int max_segments = 4096;   // multiple-shooting segment cap
};

// Basis of the lambda-dependent Calderon space K_lambda together with its
// orthoprojection.  Columns of `basis` are orthonormal boundary traces
// (v_j, Phi_lambda(1) v_j); the top/bottom N x N blocks are kept separately
// as initial and terminal values of the underlying solutions.
struct CalderonFrame {
  HatSystem hat;
  TransportOptions options;
  int N = 0;
  Matrix basis;       // 2N x N, orthonormal columns
  Matrix projection;  // 2N x 2N orthoprojection onto the column span
  Complex lambda() const { return hat.lambda; }
  Matrix initial_values() const { return basis.topRows(N); }
  Matrix terminal_values() const { return basis.bottomRows(N); }
};

CalderonFrame calderon_frame(const HatSystem& hat, const TransportOptions& opts = {});

// Matrix of S(P) = P o P(D-hat): K_lambda -> range(P) in the frame basis of
// K_lambda and the leading-singular-vector basis of range(P).
Matrix s_matrix(const CalderonFrame& frame, const BoundaryProjection& p);
Matrix s_matrix_with_bases(const CalderonFrame& frame, const Matrix& range_basis_p);

struct PoissonData {
  CalderonFrame frame;
  BoundaryProjection condition;
  Matrix range_basis_p;  // 2N x N orthonormal basis of range(P)
  Matrix s_inverse;      // inverse of s_matrix in those bases
  std::shared_ptr<const FundamentalSolution> transport;
};

PoissonData make_poisson(const CalderonFrame& frame, const BoundaryProjection& p);

// Interior solution s(u) of D-hat_lambda s = 0 with P gamma s = P h.
Vector poisson_solve(const PoissonData& data, const Vector& h, double u);

struct GridFunction {
  std::vector<double> u;
  std::vector<Vector> values;
};

using SourceFn = std::function<Vector(double)>;

// Solve D-hat_lambda s = f, P gamma s = 0 by variation of constants plus
// boundary matching.  f takes values in the N-dimensional target (ordered as
// the rows of the companion system).
GridFunction green_solve(const HatSystem& hat, const BoundaryProjection& p, const SourceFn& f,
                         const TransportOptions& opts = {});

// Tr{ (D_{P1} - lambda)^{-1} - (D_{P2} - lambda)^{-1} } via the quadrature
// trace of the finite-rank correction kernel restricted to the (1,1) block.
Complex relative_resolvent_trace(const HatSystem& hat, const BoundaryProjection& p1,
                                 const BoundaryProjection& p2, const TransportOptions& opts = {});

// Raw transfer matrix Phi_lambda(1) (matrix exponential for constant
// systems, RK4 otherwise).  Not renormalized; intended for spectral windows
// and moderate lambda.
Matrix transfer_matrix(const HatSystem& hat, const TransportOptions& opts = {});

// det(B_P^* [I; Phi_lambda(1)]) with a caller-fixed range basis; analytic in
// lambda, vanishing exactly at the eigenvalues of the EBVP.
Complex characteristic_det(const ComposedOperator& op, const Matrix& range_basis_p, Complex lambda,
                           const TransportOptions& opts = {});

// Orthonormal 2N x N basis of K_lambda by renormalized transport; stable for
// large |lambda| along rays of growth.
Matrix stable_frame_basis(const HatSystem& hat, const TransportOptions& opts = {});

// Kernel dimensions of the EBVP at lambda = 0 through three computational
// realizations (S(P) rank defect, P restricted to the Calderon frame, and the
// raw RK4 trace matrix), plus the cokernel via the adjoint system
// w' = -M^* w with (I-P)(-w(0), w(1)) = 0.
struct IndexReport {
  int dim_ker_smatrix = 0;
  int dim_ker_frame = 0;
  int dim_ker_raw = 0;
  int dim_coker = 0;
  bool kernels_agree = false;
  int index() const { return dim_ker_smatrix - dim_coker; }
};

IndexReport index_check(const ComposedOperator& op, const BoundaryProjection& p,
                        const TransportOptions& opts = {});

}  // namespace caldet
