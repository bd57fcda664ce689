#include "caldet/quillen.hpp"

#include <cmath>

#include "caldet/parallel.hpp"

namespace caldet {

DiracFactor formal_adjoint(const DiracFactor& f) {
  const Matrix sigma2 = -f.sigma.adjoint();
  const Matrix s = f.sigma;
  Coefficient coeff2 = [&]() {
    if (f.coeff.is_polynomial()) {
      std::vector<Matrix> coeffs;
      for (int k = 0; k <= f.coeff.degree(); ++k) {
        // derivative_at(0,k)/k! recovers the polynomial coefficients
        Matrix ak = f.coeff.derivative_at(0.0, k);
        double fac = 1.0;
        for (int i = 2; i <= k; ++i) fac *= i;
        ak /= fac;
        coeffs.push_back(Matrix(-s * ak.adjoint() * s.adjoint()));
      }
      return Coefficient::polynomial(coeffs);
    }
    const Coefficient base = f.coeff;
    return Coefficient::callable(
        [base, s](double u) { return Matrix(-s * base.at(u).adjoint() * s.adjoint()); }, f.m);
  }();
  return make_dirac_factor(sigma2, std::move(coeff2), f.constant_near_boundary);
}

namespace {

// quadrature adjointness test on bump-profile polynomials
void verify_formal_adjoint(const DiracFactor& d, const DiracFactor& dstar) {
  const int m = d.m;
  const int panels = 512;
  const auto w = simpson_weights(panels, 1.0 / panels);
  Complex mismatch = 0.0;
  double scale = 0.0;
  for (int trial = 0; trial < 2; ++trial) {
    // s, t vanish at both endpoints so the boundary form drops out
    const auto bump = [trial, m](double u, int k) -> Vector {
      // p(u) = u^2 (1-u)^2 (1 + c u), componentwise with shifted c
      Vector v(m);
      for (int i = 0; i < m; ++i) {
        const double c = 0.3 + 0.2 * trial + 0.1 * i;
        // derivatives of u^2(1-u)^2(1+cu) up to k = 1 are needed
        const double p = u * u * (1 - u) * (1 - u) * (1 + c * u);
        const double dp = (2 * u * (1 - u) * (1 - u) - 2 * u * u * (1 - u)) * (1 + c * u) +
                          u * u * (1 - u) * (1 - u) * c;
        v(i) = k == 0 ? p : dp;
      }
      return v;
    };
    const auto tfun = [trial, m](double u, int k) -> Vector {
      Vector v(m);
      for (int i = 0; i < m; ++i) {
        const double c = -0.25 + 0.15 * trial + 0.05 * i;
        const double p = u * u * (1 - u) * (1 - u) * (1 + c * u * u);
        const double dp = (2 * u * (1 - u) * (1 - u) - 2 * u * u * (1 - u)) * (1 + c * u * u) +
                          u * u * (1 - u) * (1 - u) * 2 * c * u;
        v(i) = k == 0 ? p : dp;
      }
      return v;
    };
    const ComposedOperator dd = compose({d});
    const ComposedOperator dds = compose({dstar});
    Complex lhs = 0.0, rhs = 0.0;
    for (int k = 0; k <= panels; ++k) {
      const double u = static_cast<double>(k) / panels;
      const Vector ds = apply(dd, bump, u);
      const Vector t = tfun(u, 0);
      const Vector s = bump(u, 0);
      const Vector dst = apply(dds, tfun, u);
      lhs += w[k] * t.dot(ds);   // <Ds, t> = int t^* (Ds)
      rhs += w[k] * dst.dot(s);  // <s, D*t> = int (D*t)^* s
      scale = std::max(scale, std::abs(lhs));
    }
    mismatch += lhs - rhs;
  }
  if (std::abs(mismatch) > 1e-8 * std::max(1.0, scale)) {
    throw NumericError("dirac_laplacian: formal adjoint failed the quadrature adjointness test");
  }
}

}  // namespace

LaplacianEBVP dirac_laplacian(const DiracFactor& base, const BoundaryProjection& p) {
  const int m = base.m;
  if (p.dim() != 2 * m) throw InputError("dirac_laplacian: condition must act on the 2m trace space");
  if (p.rank != m) throw InputError("dirac_laplacian: condition rank must equal m");

  const DiracFactor adj = formal_adjoint(base);
  verify_formal_adjoint(base, adj);

  // endpoint-signed boundary sigma for the Green pairing
  Matrix sigma2m = Matrix::Zero(2 * m, 2 * m);
  sigma2m.topLeftCorner(m, m) = -base.sigma;
  sigma2m.bottomRightCorner(m, m) = base.sigma;
  const BoundaryProjection p_adj = adjoint_condition(p, sigma2m);

  // embed P on the s0-slots and P^adj on the s1-slots of the r=2 trace space
  const int n = 2 * m;  // N = r m
  Matrix hat = Matrix::Zero(2 * n, 2 * n);
  const auto embed = [&](const Matrix& q, int offset) {
    // q is indexed by (component at u=0, component at u=1)
    const int idx[2] = {offset, n + offset};
    for (int eb = 0; eb < 2; ++eb) {
      for (int ee = 0; ee < 2; ++ee) {
        hat.block(idx[eb], idx[ee], m, m) = q.block(eb * m, ee * m, m, m);
      }
    }
  };
  embed(p.matrix, 0);
  embed(p_adj.matrix, m);

  LaplacianEBVP out{base, adj, p, make_projection(hat), compose({base, adj})};
  return out;
}

double canonical_metric(const CalderonFrame& frame, const BoundaryProjection& p) {
  const WellPosedReport wp = wellposed_check(p, frame);
  if (!wp.ok) throw SolveError("canonical_metric: condition is not well-posed");
  const Matrix s = s_matrix(frame, p);
  const Complex det = s.partialPivLu().determinant();
  return std::norm(det);  // det(S^* S) = |det S|^2
}

double quillen_metric(const LaplacianEBVP& ebvp, const OracleConfig& cfg) {
  OracleProblem problem{ebvp.composed, ebvp.hat_condition, true, cfg.transport};
  if (kernel_dimension(problem) > 0) {
    throw SolveError("quillen_metric: Dirac Laplacian has a zero mode");
  }
  const SpectrumWindow spectrum = enumerate_count(problem, cfg.head_count, cfg.scan);
  const ZetaReport report =
      spectral_zeta_det(spectrum.eigenvalues, spectrum.multiplicities, 2, cfg.zeta);
  return report.det_zeta;
}

MetricRatioReport metric_ratio_check(const DiracFactor& base, const BoundaryProjection& p1,
                                     const BoundaryProjection& p2, const OracleConfig& cfg) {
  MetricRatioReport report;
  const ComposedOperator op = compose({base});
  const CalderonFrame frame = calderon_frame(hat_system(op, 0.0), cfg.transport);
  report.canonical_p1 = canonical_metric(frame, p1);
  report.canonical_p2 = canonical_metric(frame, p2);
  report.quillen_p1 = quillen_metric(dirac_laplacian(base, p1), cfg);
  report.quillen_p2 = quillen_metric(dirac_laplacian(base, p2), cfg);
  report.zeta_ratio = std::sqrt(report.quillen_p1 / report.quillen_p2);
  report.canonical_ratio = std::sqrt(report.canonical_p1 / report.canonical_p2);
  report.discrepancy = std::abs(report.zeta_ratio - report.canonical_ratio) / report.canonical_ratio;
  return report;
}

namespace {

// holomorphic section surrogate: det of the condition pairing with the raw
// Calderon basis, holomorphic in the family parameter
Complex section_det(const FamilyGrid& grid, Complex b, const TransportOptions& transport) {
  const DiracFactor f = grid.builder(b);
  const ComposedOperator op = compose({f});
  const Matrix bp = range_basis(grid.p1.matrix, grid.p1.rank);
  return characteristic_det(op, bp, 0.0, transport);
}

}  // namespace

CurvatureReport curvature_difference(const FamilyGrid& grid, const OracleConfig& cfg) {
  if (grid.n < 3) throw InputError("curvature_difference: grid must be at least 3 x 3");
  CurvatureReport report;
  report.n = grid.n;
  report.h = grid.h;

  // Cauchy-Riemann check of the family before trusting the d-bar d stencil
  {
    const double d = 0.5 * grid.h;
    const Complex fb_p = section_det(grid, grid.center + d, cfg.transport);
    const Complex fb_m = section_det(grid, grid.center - d, cfg.transport);
    const Complex fg_p = section_det(grid, grid.center + Complex(0.0, d), cfg.transport);
    const Complex fg_m = section_det(grid, grid.center - Complex(0.0, d), cfg.transport);
    const Complex fbeta = (fb_p - fb_m) / (2.0 * d);
    const Complex fgamma = (fg_p - fg_m) / (2.0 * d);
    const Complex dbar = 0.5 * (fbeta + Complex(0.0, 1.0) * fgamma);
    report.cr_residual = std::abs(dbar) / (std::abs(fbeta) + std::abs(fgamma) + 1e-300);
    if (report.cr_residual > 1e-4) {
      throw InputError("curvature_difference: family fails the Cauchy-Riemann check (residual " +
                       std::to_string(report.cr_residual) + ")");
    }
  }

  const int n = grid.n;
  const int total = n * n;
  report.x.resize(total);
  report.y.resize(total);
  report.log_canonical_p1.resize(total);
  report.log_canonical_p2.resize(total);
  report.log_quillen_p1.resize(total);
  report.log_quillen_p2.resize(total);

  std::vector<std::string> failures(total);
  parallel_for(total, [&](int idx) {
    const int i = idx / n, j = idx % n;
    const double x = grid.center.real() + grid.h * (j - (n - 1) / 2.0);
    const double y = grid.center.imag() + grid.h * (i - (n - 1) / 2.0);
    report.x[idx] = x;
    report.y[idx] = y;
    const Complex b(x, y);
    try {
      const DiracFactor f = grid.builder(b);
      const ComposedOperator op = compose({f});
      const CalderonFrame frame = calderon_frame(hat_system(op, 0.0), cfg.transport);
      report.log_canonical_p1[idx] = std::log(canonical_metric(frame, grid.p1));
      report.log_canonical_p2[idx] = std::log(canonical_metric(frame, grid.p2));
      report.log_quillen_p1[idx] = std::log(quillen_metric(dirac_laplacian(f, grid.p1), cfg));
      report.log_quillen_p2[idx] = std::log(quillen_metric(dirac_laplacian(f, grid.p2), cfg));
    } catch (const std::exception& e) {
      failures[idx] = e.what();
    }
  });
  for (int idx = 0; idx < total; ++idx) {
    if (!failures[idx].empty()) {
      throw SolveError("curvature_difference: grid point (" + std::to_string(report.x[idx]) + ", " +
                       std::to_string(report.y[idx]) + ") failed: " + failures[idx]);
    }
  }

  // nine-point d-bar d = (1/4) Laplacian stencil at interior points
  const auto stencil = [&](const std::vector<double>& f, int i, int j) {
    const auto at = [&](int ii, int jj) { return f[ii * n + jj]; };
    const double lap = (4.0 * (at(i, j + 1) + at(i, j - 1) + at(i + 1, j) + at(i - 1, j)) +
                        at(i + 1, j + 1) + at(i + 1, j - 1) + at(i - 1, j + 1) + at(i - 1, j - 1) -
                        20.0 * at(i, j)) /
                       (6.0 * grid.h * grid.h);
    return 0.25 * lap;
  };
  for (int i = 1; i + 1 < n; ++i) {
    for (int j = 1; j + 1 < n; ++j) {
      const double z1 = stencil(report.log_quillen_p1, i, j);
      const double z2 = stencil(report.log_quillen_p2, i, j);
      const double c1 = stencil(report.log_canonical_p1, i, j);
      const double c2 = stencil(report.log_canonical_p2, i, j);
      report.curv_zeta_p1.push_back(z1);
      report.curv_zeta_p2.push_back(z2);
      report.curv_canonical_p1.push_back(c1);
      report.curv_canonical_p2.push_back(c2);
      report.diff_zeta.push_back(z1 - z2);
      report.diff_canonical.push_back(c1 - c2);
      report.max_discrepancy =
          std::max(report.max_discrepancy, std::abs((z1 - z2) - (c1 - c2)));
    }
  }
  return report;
}

}  // namespace caldet
