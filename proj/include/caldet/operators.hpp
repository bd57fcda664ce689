#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "caldet/linalg_ode.hpp"
#include "caldet/types.hpp"

namespace caldet {

// Matrix-valued coefficient A(u) on [0,1].  Held as a callable plus, when
// known, its polynomial form; polynomial coefficients are ordered by
// ascending power of u.
class Coefficient {
 public:
  static Coefficient constant(const Matrix& a);
  static Coefficient polynomial(std::vector<Matrix> coeffs);
  static Coefficient callable(CoefficientFn fn, int m);

  Matrix at(double u) const;
  // d^k/du^k A(u); only available for polynomial coefficients.
  Matrix derivative_at(double u, int k) const;
  bool is_constant() const { return kind_ == Kind::Constant; }
  bool is_polynomial() const { return kind_ != Kind::Callable; }
  int degree() const { return kind_ == Kind::Callable ? -1 : static_cast<int>(coeffs_.size()) - 1; }
  int m() const { return m_; }

 private:
  enum class Kind { Constant, Polynomial, Callable };
  Kind kind_ = Kind::Constant;
  int m_ = 0;
  std::vector<Matrix> coeffs_;
  CoefficientFn fn_;
};

// One first-order Dirac-type factor sigma (d/du + A(u)) acting on
// m-component functions over [0,1].
struct DiracFactor {
  int m = 1;
  Matrix sigma;       // m x m unitary
  Coefficient coeff;  // A(u)
  bool constant_near_boundary = true;
};

DiracFactor make_dirac_factor(const Matrix& sigma, Coefficient coeff,
                              bool constant_near_boundary = true);

// Ordered composition D^(r) = D_{r-1} ... D_0 (factors[0] applied first).
struct ComposedOperator {
  std::vector<DiracFactor> factors;
  int r() const { return static_cast<int>(factors.size()); }
  int m() const { return factors.front().m; }
  int trace_dim() const { return r() * m(); }  // N = r m
  bool constant_coefficients() const;
};

ComposedOperator compose(std::vector<DiracFactor> factors);

// First-order companion system D-hat_lambda of the composed operator: kernel
// elements are (s_0,...,s_{r-1}) with D_i s_i = s_{i+1} and
// D_{r-1} s_{r-1} = lambda s_0.
struct HatSystem {
  ComposedOperator op;
  Complex lambda = 0.0;
  int N() const { return op.trace_dim(); }
  int r() const { return op.r(); }
  int m() const { return op.m(); }
};

HatSystem hat_system(const ComposedOperator& op, Complex lambda);

// Coefficient M_lambda(u) of the equivalent ODE system s' = M_lambda(u) s for
// D-hat_lambda s = 0: block rows s_i' = -A_i s_i + sigma_i^{-1} s_{i+1}
// (i < r-1) and s_{r-1}' = -A_{r-1} s_{r-1} + lambda sigma_{r-1}^{-1} s_0.
CoefficientFn assemble_ode(const HatSystem& hat);
Matrix assemble_ode_at(const HatSystem& hat, double u);

// N x m injection of a source f in the F_0 slot of D-hat_lambda s = f into
// the ODE right-hand side: s' = M_lambda s + J f with J = E_{r-1} sigma_{r-1}^{-1}.
Matrix hat_source_injection(const HatSystem& hat);

// Full N x N source map W: D-hat_lambda s = f becomes s' = M_lambda s + W f,
// where f is ordered by target blocks (F_0, F_{r-1}, ..., F_1).
Matrix hat_source_matrix(const HatSystem& hat);

// integral over [0,1] of tr M_lambda (for Liouville scaling of
// characteristic functions).  Exact for polynomial coefficients.
Complex hat_trace_integral(const HatSystem& hat);

// A function on [0,1] given together with enough u-derivatives to apply the
// composed operator: value(u, k) returns the k-th derivative.
using SmoothFunction = std::function<Vector(double u, int k)>;

// Value at u of s_i = D_{i-1} ... D_0 s for i = 0..count-1 (count <= r+1).
// Requires polynomial coefficients.
std::vector<Vector> factor_chain_at(const ComposedOperator& op, const SmoothFunction& s,
                                    double u, int count);

// D^(r) s evaluated at u.
Vector apply(const ComposedOperator& op, const SmoothFunction& s, double u);

// Boundary trace ((s_0,...,s_{r-1})(0), (s_0,...,s_{r-1})(1)) as a 2N-vector;
// all components at u=0 come first.
Vector boundary_trace(const ComposedOperator& op, const SmoothFunction& s);

}  // namespace caldet
