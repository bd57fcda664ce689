#include "caldet/calderon.hpp"

#include <cmath>

namespace caldet {

namespace {

// growth-rate estimate for segment sizing: spectral radius of M(u), which
// tracks |lambda|^{1/r} for companion systems, plus a transient allowance
double coefficient_scale(const HatSystem& hat) {
  double scale = 0.0;
  for (double u : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const Matrix m = assemble_ode_at(hat, u);
    Eigen::ComplexEigenSolver<Matrix> es(m, false);
    double rho = 0.0;
    for (int i = 0; i < m.rows(); ++i) rho = std::max(rho, std::abs(es.eigenvalues()(i)));
    scale = std::max(scale, 2.0 * rho + 1.0);
  }
  return scale;
}

int pick_segments(const HatSystem& hat, const TransportOptions& opts, double growth_per_segment) {
  const double scale = coefficient_scale(hat);
  int segments = std::max(1, static_cast<int>(std::ceil(scale / growth_per_segment)));
  if (segments > opts.max_segments) {
    throw IntegrationError("transport too stiff: |M| ~ " + std::to_string(scale) +
                           " exceeds the segment budget");
  }
  return segments;
}

// Transfer matrix over [u, u+h]; exact exponential for constant systems.
struct SegmentStepper {
  const HatSystem& hat;
  CoefficientFn coeff;
  bool use_expm;
  int rk_substeps;
  mutable double cached_h = -1.0;
  mutable Matrix cached;

  SegmentStepper(const HatSystem& h, const TransportOptions& opts, int segments)
      : hat(h), coeff(assemble_ode(h)) {
    use_expm = hat.op.constant_coefficients() && !opts.force_rk4;
    rk_substeps = std::max(1, (opts.steps + segments - 1) / segments);
  }

  Matrix transfer(double u, double h) const {
    if (use_expm) {
      if (h != cached_h) {
        cached = expm(Matrix(assemble_ode_at(hat, 0.0) * h));
        cached_h = h;
      }
      return cached;
    }
    Matrix t = Matrix::Identity(hat.N(), hat.N());
    const double sub = h / rk_substeps;
    for (int k = 0; k < rk_substeps; ++k) t = rk4_step(coeff, u + k * sub, sub, t);
    return t;
  }
};

}  // namespace

Matrix transfer_matrix(const HatSystem& hat, const TransportOptions& opts) {
  if (hat.op.constant_coefficients() && !opts.force_rk4) {
    return expm(assemble_ode_at(hat, 0.0));
  }
  return fundamental_solution(assemble_ode(hat), opts.steps).at_end();
}

Matrix stable_frame_basis(const HatSystem& hat, const TransportOptions& opts) {
  const int n = hat.N();
  const int segments = pick_segments(hat, opts, 2.0);
  SegmentStepper stepper(hat, opts, segments);
  const double h = 1.0 / segments;

  Matrix stacked(2 * n, n);
  stacked.topRows(n) = Matrix::Identity(n, n);
  stacked.bottomRows(n) = Matrix::Identity(n, n);
  for (int k = 0; k < segments; ++k) {
    const Matrix e = stepper.transfer(k * h, h);
    stacked.bottomRows(n) = e * stacked.bottomRows(n);
    if (!stacked.allFinite()) throw NumericError("calderon frame transport overflowed");
    if (stacked.cwiseAbs().maxCoeff() > opts.renorm_threshold || k + 1 == segments) {
      Eigen::HouseholderQR<Matrix> qr(stacked);
      stacked = qr.householderQ() * Matrix::Identity(2 * n, n);
    }
  }
  return stacked;
}

CalderonFrame calderon_frame(const HatSystem& hat, const TransportOptions& opts) {
  CalderonFrame frame{hat, opts, hat.N(), {}, {}};
  frame.basis = stable_frame_basis(hat, opts);
  frame.projection = frame.basis * frame.basis.adjoint();
  return frame;
}

Matrix s_matrix_with_bases(const CalderonFrame& frame, const Matrix& range_basis_p) {
  return range_basis_p.adjoint() * frame.basis;
}

Matrix s_matrix(const CalderonFrame& frame, const BoundaryProjection& p) {
  if (p.dim() != 2 * frame.N) throw InputError("s_matrix: dimension mismatch");
  if (p.rank != frame.N) throw InputError("s_matrix: condition rank must equal N");
  return s_matrix_with_bases(frame, range_basis(p.matrix, p.rank));
}

PoissonData make_poisson(const CalderonFrame& frame, const BoundaryProjection& p) {
  const WellPosedReport report = wellposed_check(p, frame);
  if (!report.ok) {
    throw SolveError("make_poisson: condition is not well-posed at this lambda (smallest "
                     "singular value " +
                     std::to_string(report.smallest()) + ")");
  }
  PoissonData data{frame, p, range_basis(p.matrix, p.rank), {}, nullptr};
  const Matrix s = s_matrix_with_bases(frame, data.range_basis_p);
  data.s_inverse = s.partialPivLu().inverse();
  data.transport = std::make_shared<FundamentalSolution>(
      fundamental_solution(assemble_ode(frame.hat), frame.options.steps));
  return data;
}

Vector poisson_solve(const PoissonData& data, const Vector& h, double u) {
  if (h.size() != 2 * data.frame.N) throw InputError("poisson_solve: trace vector has wrong size");
  const Vector coords = data.s_inverse * (data.range_basis_p.adjoint() * h);
  const Vector initial = data.frame.initial_values() * coords;
  return data.transport->at(u) * initial;
}

GridFunction green_solve(const HatSystem& hat, const BoundaryProjection& p, const SourceFn& f,
                         const TransportOptions& opts) {
  const int n = hat.N();
  if (p.dim() != 2 * n) throw InputError("green_solve: dimension mismatch");
  const CalderonFrame frame = calderon_frame(hat, opts);
  const WellPosedReport wp = wellposed_check(p, frame);
  if (wp.smallest() < 1e-10) throw SolveError("green_solve: eigenvalue hit");

  const CoefficientFn coeff = assemble_ode(hat);
  const Matrix inject = hat_source_matrix(hat);
  const auto rhs = [&](double u) -> Vector { return inject * f(u); };

  // joint RK4 pass for Phi and the particular solution sp' = M sp + F
  const int steps = opts.steps;
  const double h = 1.0 / steps;
  std::vector<Matrix> phi_nodes;
  std::vector<Vector> sp_nodes;
  phi_nodes.reserve(steps + 1);
  sp_nodes.reserve(steps + 1);
  Matrix phi = Matrix::Identity(n, n);
  Vector sp = Vector::Zero(n);
  phi_nodes.push_back(phi);
  sp_nodes.push_back(sp);
  for (int k = 0; k < steps; ++k) {
    const double u = k * h;
    const Matrix m1 = coeff(u), m2 = coeff(u + 0.5 * h), m3 = coeff(u + h);
    const Vector f1 = rhs(u), f2 = rhs(u + 0.5 * h), f3 = rhs(u + h);
    const Matrix pk1 = m1 * phi;
    const Matrix pk2 = m2 * (phi + 0.5 * h * pk1);
    const Matrix pk3 = m2 * (phi + 0.5 * h * pk2);
    const Matrix pk4 = m3 * (phi + h * pk3);
    const Vector sk1 = m1 * sp + f1;
    const Vector sk2 = m2 * (sp + 0.5 * h * sk1) + f2;
    const Vector sk3 = m2 * (sp + 0.5 * h * sk2) + f2;
    const Vector sk4 = m3 * (sp + h * sk3) + f3;
    phi += (h / 6.0) * (pk1 + 2.0 * pk2 + 2.0 * pk3 + pk4);
    sp += (h / 6.0) * (sk1 + 2.0 * sk2 + 2.0 * sk3 + sk4);
    phi_nodes.push_back(phi);
    sp_nodes.push_back(sp);
  }

  // boundary matching: (B_P^* B) c = -B_P^{(1)*} sp(1)
  const Matrix bp = range_basis(p.matrix, p.rank);
  Matrix b(2 * n, n);
  b.topRows(n) = Matrix::Identity(n, n);
  b.bottomRows(n) = phi_nodes.back();
  const Matrix lhs = bp.adjoint() * b;
  const Vector rhs_match = -(bp.bottomRows(n).adjoint() * sp_nodes.back());
  const Vector c = lhs.partialPivLu().solve(rhs_match);

  GridFunction out;
  out.u.resize(steps + 1);
  out.values.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    out.u[k] = k * h;
    out.values[k] = phi_nodes[k] * c + sp_nodes[k];
  }
  return out;
}

namespace {

// Multiple-shooting solve for X(u) = e^{-int c} Phi(u)(I - C_P), the Green
// splitting of condition P in the traceless gauge (c = tr M / N).  The chain
// uses the reduced transfers; the boundary row carries the scalar factor
// e^{int c} with overflow-safe scaling.  Returns X at the segment nodes.
std::vector<Matrix> green_splitting_chain(const HatSystem& hat,
                                          const std::vector<Matrix>& transfers_reduced,
                                          Complex total_scalar_log, const Matrix& bp,
                                          double* smallest_sv) {
  const int n = hat.N();
  const int segments = static_cast<int>(transfers_reduced.size());
  const int unknowns = (segments + 1) * n;

  Matrix a = Matrix::Zero(unknowns, unknowns);
  Matrix rhs = Matrix::Zero(unknowns, n);
  for (int k = 0; k < segments; ++k) {
    a.block(k * n, k * n, n, n) = transfers_reduced[k];
    a.block(k * n, (k + 1) * n, n, n) = -Matrix::Identity(n, n);
  }
  // BC: B^{(0)*} X_0 + e^{C} B^{(1)*} X_S = B^{(0)*}, scaled so both sides
  // stay representable whatever the sign of Re C
  const Matrix b0 = bp.topRows(n).adjoint();
  const Matrix b1 = bp.bottomRows(n).adjoint();
  if (total_scalar_log.real() <= 0.0) {
    a.block(segments * n, 0, n, n) = b0;
    a.block(segments * n, segments * n, n, n) += std::exp(total_scalar_log) * b1;
    rhs.block(segments * n, 0, n, n) = b0;
  } else {
    const Complex inv = std::exp(-total_scalar_log);
    a.block(segments * n, 0, n, n) = inv * b0;
    a.block(segments * n, segments * n, n, n) += b1;
    rhs.block(segments * n, 0, n, n) = inv * b0;
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  if (smallest_sv != nullptr) {
    const auto& r = qr.matrixR();
    double mn = 1e300, mx = 0.0;
    for (int i = 0; i < unknowns; ++i) {
      const double d = std::abs(r(i, i));
      mn = std::min(mn, d);
      mx = std::max(mx, d);
    }
    *smallest_sv = mx > 0 ? mn / mx : 0.0;
  }
  const Matrix x = qr.solve(rhs);

  std::vector<Matrix> nodes(segments + 1);
  for (int k = 0; k <= segments; ++k) nodes[k] = x.block(k * n, 0, n, n);
  return nodes;
}

}  // namespace

Complex relative_resolvent_trace(const HatSystem& hat, const BoundaryProjection& p1,
                                 const BoundaryProjection& p2, const TransportOptions& opts) {
  const int n = hat.N();
  const int m = hat.m();
  if (p1.dim() != 2 * n || p2.dim() != 2 * n) {
    throw InputError("relative_resolvent_trace: dimension mismatch");
  }
  if ((p1.matrix.array() == p2.matrix.array()).all()) return Complex(0.0, 0.0);

  const int segments = pick_segments(hat, opts, 5.0);
  if ((segments + 1) * n > 4096) {
    throw IntegrationError("relative_resolvent_trace: chain system too large at this lambda");
  }

  // traceless gauge: M = c I + M-tilde with c = tr M / N; the scalar factor
  // exp(int c) cancels in the conjugated kernel and only enters the BC row
  const CoefficientFn coeff = assemble_ode(hat);
  const CoefficientFn coeff_reduced = [coeff, n](double u) -> Matrix {
    Matrix mm = coeff(u);
    mm -= (mm.trace() / static_cast<double>(n)) * Matrix::Identity(n, n);
    return mm;
  };
  const Complex total_scalar_log = hat_trace_integral(hat) / static_cast<double>(n);

  const bool use_expm = hat.op.constant_coefficients() && !opts.force_rk4;
  const double hseg = 1.0 / segments;
  const int steps = opts.steps % 2 == 0 ? opts.steps : opts.steps + 1;
  const int per_seg = std::max(2, steps / segments + (steps / segments) % 2);
  const int fine_total = per_seg * segments;
  const double hf = 1.0 / fine_total;

  // reduced segment transfers
  std::vector<Matrix> transfers(segments);
  int rk_sub = std::max(1, per_seg);
  if (use_expm) {
    const Matrix e = expm(Matrix(coeff_reduced(0.0) * hseg));
    for (int k = 0; k < segments; ++k) transfers[k] = e;
  } else {
    for (int k = 0; k < segments; ++k) {
      Matrix t = Matrix::Identity(n, n);
      const double sub = hseg / rk_sub;
      for (int j = 0; j < rk_sub; ++j) t = rk4_step(coeff_reduced, k * hseg + j * sub, sub, t);
      transfers[k] = t;
    }
  }

  const Matrix b1 = range_basis(p1.matrix, p1.rank);
  const Matrix b2 = range_basis(p2.matrix, p2.rank);
  double sv1 = 0.0, sv2 = 0.0;
  const auto x1 = green_splitting_chain(hat, transfers, total_scalar_log, b1, &sv1);
  const auto x2 = green_splitting_chain(hat, transfers, total_scalar_log, b2, &sv2);
  if (sv1 < 1e-12 || sv2 < 1e-12) {
    throw SolveError("relative_resolvent_trace: eigenvalue hit (chain solve singular)");
  }

  // kernel diagonal K(u) = D(u) Y(u) with D = X1 - X2 (bounded, forward) and
  // Y = Phi-tilde^{-1} (adjoint transport); the (1,1)-block trace is
  // integrated by composite Simpson on the fine grid
  const auto weights = simpson_weights(fine_total, hf);
  const Matrix inject = hat_source_injection(hat);

  Matrix efine_fwd, efine_adj;
  if (use_expm) {
    efine_fwd = expm(Matrix(coeff_reduced(0.0) * hf));
    efine_adj = expm(Matrix(-coeff_reduced(0.0) * hf));
  }
  const CoefficientFn adj = [coeff_reduced](double v) -> Matrix {
    return Matrix(-coeff_reduced(v).transpose());
  };

  Complex trace = 0.0;
  Matrix y = Matrix::Identity(n, n);
  int emitted = 0;
  for (int k = 0; k < segments; ++k) {
    Matrix d = x1[k] - x2[k];
    for (int j = 0; j <= per_seg; ++j) {
      if (j > 0) {
        const double u = k * hseg + (j - 1) * hf;
        if (use_expm) {
          d = efine_fwd * d;
          y = y * efine_adj;
        } else {
          d = rk4_step(coeff_reduced, u, hf, d);
          y = rk4_step(adj, u, hf, y.transpose().eval()).transpose();
        }
      }
      if (j == per_seg && k + 1 < segments) break;  // next segment re-anchors D
      const int node = k * per_seg + j;
      if (node < emitted) continue;
      emitted = node + 1;
      const Matrix kernel = d * y;  // = Phi (C2 - C1) Phi^{-1}
      trace += weights[node] * (kernel.topRows(m) * inject).trace();
    }
  }
  return trace;
}

namespace {

int small_singular_count(const Matrix& a, double tol) {
  Eigen::JacobiSVD<Matrix> svd(a);
  int count = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) < tol) ++count;
  }
  return count;
}

}  // namespace

IndexReport index_check(const ComposedOperator& op, const BoundaryProjection& p,
                        const TransportOptions& opts) {
  const int n = op.trace_dim();
  if (p.dim() != 2 * n) throw InputError("index_check: dimension mismatch");
  const HatSystem hat = hat_system(op, 0.0);
  IndexReport report;

  const CalderonFrame frame = calderon_frame(hat, opts);
  report.dim_ker_smatrix = small_singular_count(s_matrix(frame, p), 1e-8);
  report.dim_ker_frame = small_singular_count(Matrix(p.matrix * frame.basis), 1e-8);

  // raw trace matrix through the fixed-step integrator
  TransportOptions raw = opts;
  raw.force_rk4 = true;
  Matrix b(2 * n, n);
  b.topRows(n) = Matrix::Identity(n, n);
  b.bottomRows(n) = fundamental_solution(assemble_ode(hat), raw.steps).at_end();
  report.dim_ker_raw =
      small_singular_count(Matrix(range_basis(p.matrix, p.rank).adjoint() * orthonormal_columns(b)),
                           1e-8);

  // cokernel: solutions of the adjoint system w' = -M^* w subject to
  // (I - P)(-w(0), w(1)) = 0
  const CoefficientFn coeff = assemble_ode(hat);
  const CoefficientFn adj = [coeff](double u) { return Matrix(-coeff(u).adjoint()); };
  const Matrix phi_adj = fundamental_solution(adj, opts.steps).at_end();
  Matrix v(2 * n, n);
  v.topRows(n) = -Matrix::Identity(n, n);
  v.bottomRows(n) = phi_adj;
  const Matrix complement = Matrix::Identity(2 * n, 2 * n) - p.matrix;
  report.dim_coker = small_singular_count(Matrix(complement * orthonormal_columns(v)), 1e-8);

  report.kernels_agree = report.dim_ker_smatrix == report.dim_ker_frame &&
                         report.dim_ker_frame == report.dim_ker_raw;
  return report;
}

Complex characteristic_det(const ComposedOperator& op, const Matrix& range_basis_p, Complex lambda,
                           const TransportOptions& opts) {
  const HatSystem hat = hat_system(op, lambda);
  const int n = hat.N();
  Matrix b(2 * n, n);
  b.topRows(n) = Matrix::Identity(n, n);
  b.bottomRows(n) = transfer_matrix(hat, opts);
  Eigen::PartialPivLU<Matrix> lu(Matrix(range_basis_p.adjoint() * b));
  return lu.determinant();
}

}  // namespace caldet
