#pragma once

#include <optional>
#include <vector>

#include "caldet/calderon.hpp"
#include "caldet/types.hpp"

namespace caldet {

// Hurwitz zeta sum_{k>=0} (k+a)^{-s} for a > 0, continued by Euler-Maclaurin;
// valid away from s = 1.  The _ds variant also returns d/ds.
Complex hurwitz_zeta(Complex s, double a);
struct ZetaPair {
  Complex value;
  Complex ds;
};
ZetaPair hurwitz_zeta_with_ds(Complex s, double a);

inline Complex riemann_zeta(Complex s) { return hurwitz_zeta(s, 1.0); }

// ---------------------------------------------------------------------------
// Eigenvalue enumeration by root-finding on the characteristic function

struct OracleProblem {
  ComposedOperator op;
  BoundaryProjection condition;
  bool positive_spectrum = false;  // scan in nu = lambda^{1/r} (Laplacian type)
  TransportOptions transport;
};

struct OracleOptions {
  double scan_resolution = 0.05;  // grid step in the scan variable
  double zero_exclusion = 1e-6;   // |lambda| below this is the zero-mode zone
  double realness_tol = 1e-6;
  int max_refinements = 2;
};

struct SpectrumWindow {
  std::vector<double> eigenvalues;  // sorted ascending
  std::vector<int> multiplicities;
  double window_min = 0.0;
  double window_max = 0.0;
  int winding_count = 0;  // argument-principle count over the window rectangle
  bool complete = false;
  bool has_zero_mode = false;
  int zero_mode_dim = 0;
  int total_multiplicity() const;
};

// All eigenvalues in [window_min, window_max], bracketed on the real axis and
// certified against the winding of the characteristic function.
SpectrumWindow enumerate_spectrum(const OracleProblem& problem, double window_min,
                                  double window_max, const OracleOptions& opts = {});

// Window derived from a Weyl estimate for the requested eigenvalue count.
SpectrumWindow enumerate_count(const OracleProblem& problem, int count,
                               const OracleOptions& opts = {});

// Kernel dimension at lambda = 0 (singular values of S_0(P) below 1e-8).
int kernel_dimension(const OracleProblem& problem);

// ---------------------------------------------------------------------------
// Spectral zeta values and determinants

struct WeylClassFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

struct WeylTailModel {
  int r = 1;
  int period = 1;
  std::vector<WeylClassFit> classes;
  double residual = 0.0;  // max |mu_n - model| over the fitted range
};

// Fit mu_n = lambda_n^{1/r} ~ a t + b + c/(a t + b) per residue class of the
// sorted index (period auto-selected between 1 and 2 when period == 0).
WeylTailModel fit_weyl_tail(const std::vector<double>& eigenvalues, int r, int period = 0);

struct ZetaOptions {
  bool use_tail = true;
  int period = 0;           // 0: auto
  double richardson_h = 0.01;
  double tail_residual_tol = 1e-3;
};

struct ZetaReport {
  std::vector<Complex> s_values;
  std::vector<Complex> zeta_samples;
  double zeta_at_zero = 0.0;
  double zeta_prime_at_zero = 0.0;
  double det_zeta = 0.0;
  WeylTailModel tail;
  int head_count = 0;
  bool determinant_ready = false;
};

// zeta(s) = head sum + Weyl tail via Hurwitz continuation.  All eigenvalues
// must be strictly positive.
ZetaReport zeta_values(const std::vector<double>& eigenvalues, const std::vector<int>& multiplicities,
                       int r, const std::vector<Complex>& s_grid, const ZetaOptions& opts = {});

// Completes zeta(0), zeta'(0) by Richardson extrapolation in s and the
// determinant exp(-zeta'(0)).
ZetaReport zeta_det(const ZetaReport& partial, const std::vector<double>& eigenvalues,
                    const std::vector<int>& multiplicities, int r, const ZetaOptions& opts = {});

// Convenience: enumeration + continuation in one call.
ZetaReport spectral_zeta_det(const std::vector<double>& eigenvalues,
                             const std::vector<int>& multiplicities, int r,
                             const ZetaOptions& opts = {});

}  // namespace caldet
