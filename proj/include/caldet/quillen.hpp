#pragma once

#include <functional>
#include <vector>

#include "caldet/reldet.hpp"
#include "caldet/zeta_oracle.hpp"

namespace caldet {

// Formal adjoint of sigma (d/du + A): equals sigma2 (d/du + A2) with
// sigma2 = -sigma^* and A2 = -sigma A^* sigma^*.
DiracFactor formal_adjoint(const DiracFactor& f);

// Dirac Laplacian EBVP: Delta = D^* D with domain P gamma s = 0,
// P^adj gamma (D s) = 0, realized as the r = 2 composition (D, D^*) with the
// block boundary condition P (+) P^adj on the 4m trace space.
struct LaplacianEBVP {
  DiracFactor base;
  DiracFactor adjoint_factor;
  BoundaryProjection condition;
  BoundaryProjection hat_condition;
  ComposedOperator composed;
};

LaplacianEBVP dirac_laplacian(const DiracFactor& base, const BoundaryProjection& p);

struct OracleConfig {
  int head_count = 200;
  OracleOptions scan;
  ZetaOptions zeta;
  TransportOptions transport;
};

// Canonical metric ||det D_P||^2_C = det(S(P)^* S(P)) at lambda = 0.
double canonical_metric(const CalderonFrame& frame, const BoundaryProjection& p);

// Quillen metric ||det D_P||^2_zeta = det_zeta(Delta_P) via the spectral oracle.
double quillen_metric(const LaplacianEBVP& ebvp, const OracleConfig& cfg = {});

struct MetricRatioReport {
  double canonical_p1 = 0.0, canonical_p2 = 0.0;  // squared norms
  double quillen_p1 = 0.0, quillen_p2 = 0.0;      // squared norms
  double zeta_ratio = 0.0;                        // ||det D_P1||_z / ||det D_P2||_z
  double canonical_ratio = 0.0;
  double discrepancy = 0.0;  // relative difference of the two ratios
};

MetricRatioReport metric_ratio_check(const DiracFactor& base, const BoundaryProjection& p1,
                                     const BoundaryProjection& p2, const OracleConfig& cfg = {});

// Holomorphic family of first-order operators over a parameter rectangle.
struct FamilyGrid {
  std::function<DiracFactor(Complex)> builder;
  Complex center{0.0, 0.0};
  double h = 0.02;
  int n = 5;
  BoundaryProjection p1, p2;
};

struct CurvatureReport {
  int n = 0;
  double h = 0.0;
  std::vector<double> x, y;  // flattened row-major n x n
  std::vector<double> log_canonical_p1, log_canonical_p2;
  std::vector<double> log_quillen_p1, log_quillen_p2;
  // interior (n-2) x (n-2), nine-point d-bar d stencil values
  std::vector<double> curv_zeta_p1, curv_zeta_p2, curv_canonical_p1, curv_canonical_p2;
  std::vector<double> diff_zeta, diff_canonical;
  double max_discrepancy = 0.0;  // max |diff_zeta - diff_canonical|
  double cr_residual = 0.0;      // Cauchy-Riemann check on the section
};

// Nine-point finite-difference curvature of log||det||^2 for both metrics and
// both conditions; exposes R1 - R2 per metric.
CurvatureReport curvature_difference(const FamilyGrid& grid, const OracleConfig& cfg = {});

}  // namespace caldet
