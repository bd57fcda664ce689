#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "caldet/calderon.hpp"
#include "caldet/types.hpp"

namespace caldet {

// Spectral cut l_theta and the |lambda| grid along it.
struct RayConfig {
  double theta = kPi;
  std::vector<double> radii;  // strictly increasing
  double min_gap = 0.5;       // exclusion distance from detected eigenvalues

  static std::vector<double> geometric(double lo, double hi, int count);
  static RayConfig for_order(int r);
};

// Exponent lattice of the integrated resolvent expansion: powers (n-j)/r
// (n = 1 here) with log(-lambda) factors at the non-positive exponents
// contributed by the boundary terms.
struct AsymptoticModel {
  int r = 1;
  int exponent_count = 7;      // exponents (1-j)/r, j = 0..exponent_count-1
  int log_exponent_count = 3;  // single log factors at -k/r, k = 1..this
  bool include_log = true;
  bool decay_only = false;     // constant + negative powers, no logs

  struct Term {
    double alpha;
    int log_power;
  };
  std::vector<Term> terms() const;
  static AsymptoticModel for_order(int r);
};

struct CurveSample {
  Complex lambda;
  Complex g;  // log det ratio, branch-continued along the ray
};

struct LogCurve {
  double theta = 0.0;
  std::vector<CurveSample> samples;
  int winding = 0;
};

using HatBuilder = std::function<HatSystem(Complex)>;

// log det_{C(P2)}(D_{lambda,P1}) along the ray, up to the lambda-independent
// basepoint constant: g(lambda) = log det S_lambda(P1) - log det S_lambda(P2)
// in fixed orthonormal bases.  The branch is unwound continuously along
// increasing |lambda|; the grid auto-refines (up to 4 times) until adjacent
// phase steps stay below pi/2.
LogCurve lambda_log_curve(const HatBuilder& builder, const BoundaryProjection& p1,
                          const BoundaryProjection& p2, const RayConfig& ray,
                          const TransportOptions& opts = {});

struct LimFit {
  Complex a00{0.0};
  double residual = 0.0;
  double condition = 0.0;
};

// Weighted least-squares fit of the curve against the model lattice;
// returns the constant coefficient a00.
LimFit lim_extract(const LogCurve& curve, const AsymptoticModel& model,
                   const std::vector<double>& weights = {});

// det over K of (P1 S(P2))^{-1} S(P1); exactly 1 when P1 == P2.
Complex canonical_det(const CalderonFrame& frame, const BoundaryProjection& p1,
                      const BoundaryProjection& p2);

struct DeterminantReport {
  Complex canonical_det_at_zero{1.0};
  Complex lim_value{0.0};
  double lim_residual = 0.0;
  double lim_condition = 0.0;
  Complex relative_zeta_det{1.0};
  std::optional<double> oracle_ratio;      // quotient of oracle zeta-determinants
  std::optional<double> oracle_rel_error;  // |relative det vs oracle| comparison
  int branch_winding = 0;
  bool basepoint_invertible = true;
  bool equal_zeta_zero = false;
  bool plain_limit_consistent = true;
  Complex lim_cross_check_delta{0.0};
  LogCurve curve;
};

struct RelDetProblem {
  ComposedOperator op;
  BoundaryProjection p1, p2;
  RayConfig ray;
  AsymptoticModel model;
  bool equal_zeta_zero = false;
  TransportOptions transport;
};

// Theorem-1 assembly: relative zeta determinant = det ratio at 0 times
// exp(-LIM of the log curve).
DeterminantReport relative_zeta_det(const RelDetProblem& problem);

// ---------------------------------------------------------------------------
// Contour route for the relative zeta function

struct ContourOptions {
  double r0 = 0.05;
  double max_radius = 1e4;
  double tail_rel_tol = 1e-10;
  int panel_points = 16;
  int circle_points = 64;
  double richardson_h = 0.005;
};

struct ContourReport {
  std::vector<Complex> s_values;
  std::vector<Complex> zeta_values;
  Complex zeta_prime_at_zero{0.0};
  Complex det_ratio{1.0};  // exp(-zeta_rel'(0))
  double used_radius = 0.0;
  double tail_estimate = 0.0;
};

using TraceFn = std::function<Complex(Complex)>;

// zeta_rel(s) = (1/2 pi i) contour integral of lambda^{-s} trace_fn(lambda)
// over the keyhole around the ray theta; -zeta'(0) by Richardson in s.
ContourReport contour_zeta(const TraceFn& trace_fn, double theta,
                           const std::vector<Complex>& s_values, const ContourOptions& opts = {});

ContourReport relative_zeta_contour(const RelDetProblem& problem,
                                    const std::vector<Complex>& s_values,
                                    const ContourOptions& opts = {});

}  // namespace caldet
