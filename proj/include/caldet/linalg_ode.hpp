#pragma once

#include <functional>
#include <vector>

#include "caldet/types.hpp"

namespace caldet {

using CoefficientFn = std::function<Matrix(double)>;

// Fundamental matrix solution Phi of Phi' = M(u) Phi, Phi(0) = I, sampled on
// a uniform grid over [0,1].  Between grid nodes values are reconstructed by
// a single RK4 substep, so off-node evaluation keeps the integrator order.
class FundamentalSolution {
 public:
  FundamentalSolution(CoefficientFn coeff, int steps, std::vector<Matrix> nodes)
      : coeff_(std::move(coeff)), steps_(steps), nodes_(std::move(nodes)) {}

  int steps() const { return steps_; }
  double node_u(int k) const { return static_cast<double>(k) / steps_; }
  const Matrix& at_node(int k) const { return nodes_.at(k); }
  const Matrix& at_end() const { return nodes_.back(); }
  Matrix at(double u) const;
  const CoefficientFn& coefficient() const { return coeff_; }

 private:
  CoefficientFn coeff_;
  int steps_;
  std::vector<Matrix> nodes_;  // Phi at u = k/steps, k = 0..steps
};

// Classical fixed-step RK4 for the matrix ODE Phi' = M(u) Phi.
// steps >= 16; coefficient entries must be finite on the grid.
FundamentalSolution fundamental_solution(const CoefficientFn& coeff, int steps = 1024);

// One RK4 step of Y' = M(u) Y from u over step h applied to Y.
Matrix rk4_step(const CoefficientFn& coeff, double u, double h, const Matrix& y);

// Orthoprojection onto the span of the given vectors.  The vectors must be
// linearly independent: the smallest singular value of the column matrix is
// required to exceed rank_tol relative to the largest.
Matrix orthoprojection(const std::vector<Vector>& span, double rank_tol = 1e-10);
Matrix orthoprojection(const Matrix& columns, double rank_tol = 1e-10);

// Orthonormal basis for the column span (thin QR with a rank check).
Matrix orthonormal_columns(const Matrix& columns, double rank_tol = 1e-10);

// Orthonormal basis of range(P) for a projection of the given rank, taken
// from the leading singular vectors of P.  Deterministic for fixed input.
Matrix range_basis(const Matrix& projection, int rank);

// Dense matrix exponential (scaling-and-squaring via Eigen).
Matrix expm(const Matrix& a);

// log(det A) through a partial-pivot LU; imaginary part is the principal
// argument in (-pi, pi].
Complex log_det(const Matrix& a);

// Composite Simpson weights for a uniform grid with n+1 nodes (n even).
std::vector<double> simpson_weights(int n, double h);

}  // namespace caldet
