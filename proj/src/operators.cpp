#include "caldet/operators.hpp"

#include <cmath>

namespace caldet {

Coefficient Coefficient::constant(const Matrix& a) {
  Coefficient c;
  c.kind_ = Kind::Constant;
  c.m_ = static_cast<int>(a.rows());
  c.coeffs_ = {a};
  return c;
}

Coefficient Coefficient::polynomial(std::vector<Matrix> coeffs) {
  if (coeffs.empty()) throw InputError("polynomial coefficient needs at least one term");
  Coefficient c;
  c.kind_ = coeffs.size() == 1 ? Kind::Constant : Kind::Polynomial;
  c.m_ = static_cast<int>(coeffs.front().rows());
  c.coeffs_ = std::move(coeffs);
  return c;
}

Coefficient Coefficient::callable(CoefficientFn fn, int m) {
  Coefficient c;
  c.kind_ = Kind::Callable;
  c.m_ = m;
  c.fn_ = std::move(fn);
  return c;
}

Matrix Coefficient::at(double u) const {
  if (kind_ == Kind::Callable) return fn_(u);
  Matrix out = Matrix::Zero(m_, m_);
  double p = 1.0;
  for (const auto& a : coeffs_) {
    out += p * a;
    p *= u;
  }
  return out;
}

Matrix Coefficient::derivative_at(double u, int k) const {
  if (k == 0) return at(u);
  if (kind_ == Kind::Callable) {
    throw InputError("derivative of a callable coefficient is not available");
  }
  Matrix out = Matrix::Zero(m_, m_);
  for (size_t j = k; j < coeffs_.size(); ++j) {
    double fac = 1.0;
    for (int i = 0; i < k; ++i) fac *= static_cast<double>(j - i);
    out += fac * std::pow(u, static_cast<double>(j - k)) * coeffs_[j];
  }
  return out;
}

DiracFactor make_dirac_factor(const Matrix& sigma, Coefficient coeff, bool constant_near_boundary) {
  const int m = static_cast<int>(sigma.rows());
  if (sigma.cols() != m) throw InputError("sigma must be square");
  if (coeff.m() != m) throw InputError("sigma and coefficient dimensions differ");
  const double unitarity = (sigma * sigma.adjoint() - Matrix::Identity(m, m)).norm();
  if (unitarity > 1e-12) {
    throw InputError("sigma is not unitary (residual " + std::to_string(unitarity) + ")");
  }
  return DiracFactor{m, sigma, std::move(coeff), constant_near_boundary};
}

bool ComposedOperator::constant_coefficients() const {
  for (const auto& f : factors) {
    if (!f.coeff.is_constant()) return false;
  }
  return true;
}

ComposedOperator compose(std::vector<DiracFactor> factors) {
  if (factors.empty()) throw InputError("compose: empty factor list");
  const int m = factors.front().m;
  for (const auto& f : factors) {
    if (f.m != m) throw InputError("compose: factors have mismatched fibre dimension");
  }
  return ComposedOperator{std::move(factors)};
}

HatSystem hat_system(const ComposedOperator& op, Complex lambda) {
  return HatSystem{op, lambda};
}

Matrix assemble_ode_at(const HatSystem& hat, double u) {
  const int r = hat.r();
  const int m = hat.m();
  const int n = hat.N();
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < r; ++i) {
    const auto& f = hat.op.factors[i];
    out.block(i * m, i * m, m, m) = -f.coeff.at(u);
    const Matrix sigma_inv = f.sigma.adjoint();  // unitary
    if (i < r - 1) {
      out.block(i * m, (i + 1) * m, m, m) = sigma_inv;
    } else {
      out.block(i * m, 0, m, m) += hat.lambda * sigma_inv;
    }
  }
  return out;
}

CoefficientFn assemble_ode(const HatSystem& hat) {
  return [hat](double u) { return assemble_ode_at(hat, u); };
}

Matrix hat_source_injection(const HatSystem& hat) {
  const int r = hat.r();
  const int m = hat.m();
  Matrix j = Matrix::Zero(hat.N(), m);
  j.block((r - 1) * m, 0, m, m) = hat.op.factors[r - 1].sigma.adjoint();
  return j;
}

Matrix hat_source_matrix(const HatSystem& hat) {
  const int r = hat.r();
  const int m = hat.m();
  Matrix w = Matrix::Zero(hat.N(), hat.N());
  for (int i = 0; i < r; ++i) {
    const int src = (r - 1 - i) % r;  // target block feeding row i
    w.block(i * m, src * m, m, m) = hat.op.factors[i].sigma.adjoint();
  }
  return w;
}

Complex hat_trace_integral(const HatSystem& hat) {
  Complex total = 0.0;
  const int panels = 256;
  const auto w = simpson_weights(panels, 1.0 / panels);
  for (const auto& f : hat.op.factors) {
    if (f.coeff.is_constant()) {
      total -= f.coeff.at(0.0).trace();
      continue;
    }
    Complex acc = 0.0;
    for (int k = 0; k <= panels; ++k) acc += w[k] * f.coeff.at(static_cast<double>(k) / panels).trace();
    total -= acc;
  }
  if (hat.r() == 1) {
    total += hat.lambda * hat.op.factors[0].sigma.adjoint().trace();
  }
  return total;
}

std::vector<Vector> factor_chain_at(const ComposedOperator& op, const SmoothFunction& s,
                                    double u, int count) {
  const int r = op.r();
  if (count > r + 1) throw InputError("factor_chain_at: count exceeds r+1");
  const int depth = count - 1;
  // jet[k] = k-th derivative of the current chain element at u
  std::vector<Vector> jet(depth + 1);
  for (int k = 0; k <= depth; ++k) jet[k] = s(u, k);

  std::vector<Vector> chain;
  chain.push_back(jet[0]);
  for (int i = 0; i + 1 < count; ++i) {
    const auto& f = op.factors[i];
    const int d = depth - i - 1;
    std::vector<Vector> next(d + 1);
    for (int k = 0; k <= d; ++k) {
      Vector v = jet[k + 1];
      // Leibniz rule for A(u) s(u)
      double binom = 1.0;
      for (int j = 0; j <= k; ++j) {
        v += binom * (f.coeff.derivative_at(u, j) * jet[k - j]);
        binom *= static_cast<double>(k - j) / (j + 1);
      }
      next[k] = f.sigma * v;
    }
    jet = std::move(next);
    chain.push_back(jet[0]);
  }
  return chain;
}

Vector apply(const ComposedOperator& op, const SmoothFunction& s, double u) {
  return factor_chain_at(op, s, u, op.r() + 1).back();
}

Vector boundary_trace(const ComposedOperator& op, const SmoothFunction& s) {
  const int r = op.r();
  const int m = op.m();
  const int n = op.trace_dim();
  const auto at0 = factor_chain_at(op, s, 0.0, r);
  const auto at1 = factor_chain_at(op, s, 1.0, r);
  Vector out(2 * n);
  for (int i = 0; i < r; ++i) {
    out.segment(i * m, m) = at0[i];
    out.segment(n + i * m, m) = at1[i];
  }
  return out;
}

}  // namespace caldet
