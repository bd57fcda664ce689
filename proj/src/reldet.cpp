#include "caldet/reldet.hpp"

#include <algorithm>
#include <cmath>

#include "caldet/parallel.hpp"

namespace caldet {

std::vector<double> RayConfig::geometric(double lo, double hi, int count) {
  if (count < 2 || lo <= 0.0 || hi <= lo) throw InputError("RayConfig: bad radii grid");
  std::vector<double> radii(count);
  const double ratio = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) radii[i] = lo * std::exp(ratio * i);
  return radii;
}

RayConfig RayConfig::for_order(int r) {
  RayConfig ray;
  ray.theta = (r % 2 == 0) ? kPi : 0.5 * kPi;
  ray.radii = geometric(10.0, 1000.0, 24);
  return ray;
}

// the constant a00 column is supplied by lim_extract itself, so the pure
// (alpha = 0, no log) term is omitted here
std::vector<AsymptoticModel::Term> AsymptoticModel::terms() const {
  std::vector<Term> out;
  if (decay_only) {
    for (int j = 1; j < exponent_count; ++j) {
      const double alpha = (1.0 - j) / r;
      if (alpha >= 0.0) continue;
      out.push_back({alpha, 0});
    }
    return out;
  }
  for (int j = 0; j < exponent_count; ++j) {
    const double alpha = (1.0 - j) / r;
    if (alpha != 0.0) out.push_back({alpha, 0});
    if (!include_log) continue;
    if (j == 1) {
      out.push_back({0.0, 1});
      out.push_back({0.0, 2});
    } else if (alpha < 0.0 && j - 1 <= log_exponent_count) {
      out.push_back({alpha, 1});
    }
  }
  return out;
}

AsymptoticModel AsymptoticModel::for_order(int r) {
  AsymptoticModel model;
  model.r = r;
  return model;
}

namespace {

// principal log of -lambda for lambda on the ray
Complex log_minus(Complex lambda) { return std::log(-lambda); }

Complex curve_value(const HatBuilder& builder, const Matrix& b1, const Matrix& b2, Complex lambda,
                    const TransportOptions& opts) {
  const HatSystem hat = builder(lambda);
  const Matrix frame = stable_frame_basis(hat, opts);
  const Matrix s1 = b1.adjoint() * frame;
  const Matrix s2 = b2.adjoint() * frame;
  for (const Matrix* s : {&s1, &s2}) {
    Eigen::JacobiSVD<Matrix> svd(*s);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-10) {
      throw SpectralCutError("lambda_log_curve: eigenvalue on or near the ray at |lambda|=" +
                             std::to_string(std::abs(lambda)));
    }
  }
  return log_det(s1) - log_det(s2);
}

void unwind(std::vector<CurveSample>& samples) {
  for (size_t i = 1; i < samples.size(); ++i) {
    const double prev = samples[i - 1].g.imag();
    double im = samples[i].g.imag();
    const double k = std::round((im - prev) / (2.0 * kPi));
    samples[i].g -= Complex(0.0, 2.0 * kPi * k);
  }
}

double max_phase_step(const std::vector<CurveSample>& samples) {
  double mx = 0.0;
  for (size_t i = 1; i < samples.size(); ++i) {
    mx = std::max(mx, std::abs(samples[i].g.imag() - samples[i - 1].g.imag()));
  }
  return mx;
}

}  // namespace

LogCurve lambda_log_curve(const HatBuilder& builder, const BoundaryProjection& p1,
                          const BoundaryProjection& p2, const RayConfig& ray,
                          const TransportOptions& opts) {
  if (ray.radii.size() < 2) throw InputError("lambda_log_curve: need at least 2 radii");
  for (size_t i = 1; i < ray.radii.size(); ++i) {
    if (ray.radii[i] <= ray.radii[i - 1]) throw InputError("lambda_log_curve: radii not increasing");
  }
  LogCurve curve;
  curve.theta = ray.theta;

  const bool identical = (p1.matrix.array() == p2.matrix.array()).all();
  const Complex dir = std::exp(Complex(0.0, ray.theta));

  std::vector<double> radii = ray.radii;
  const Matrix b1 = range_basis(p1.matrix, p1.rank);
  const Matrix b2 = range_basis(p2.matrix, p2.rank);

  for (int attempt = 0; attempt <= 4; ++attempt) {
    curve.samples.assign(radii.size(), CurveSample{});
    if (identical) {
      for (size_t i = 0; i < radii.size(); ++i) {
        curve.samples[i] = {radii[i] * dir, Complex(0.0, 0.0)};
      }
      curve.winding = 0;
      return curve;
    }
    parallel_for(static_cast<int>(radii.size()), [&](int i) {
      const Complex lambda = radii[i] * dir;
      curve.samples[i] = {lambda, curve_value(builder, b1, b2, lambda, opts)};
    });
    unwind(curve.samples);
    if (max_phase_step(curve.samples) < 0.5 * kPi) {
      curve.winding = static_cast<int>(std::llround(
          (curve.samples.back().g.imag() - curve.samples.front().g.imag()) / (2.0 * kPi)));
      return curve;
    }
    if (attempt == 4) break;
    // double the grid density and retry
    std::vector<double> denser;
    for (size_t i = 0; i + 1 < radii.size(); ++i) {
      denser.push_back(radii[i]);
      denser.push_back(std::sqrt(radii[i] * radii[i + 1]));
    }
    denser.push_back(radii.back());
    radii = std::move(denser);
  }
  throw BranchError("lambda_log_curve: phase step unresolvable after refinement");
}

LimFit lim_extract(const LogCurve& curve, const AsymptoticModel& model,
                   const std::vector<double>& weights) {
  const auto terms = model.terms();
  const int n = static_cast<int>(curve.samples.size());
  const int t = static_cast<int>(terms.size()) + 1;  // + constant term
  if (n < 2 * t) {
    throw FitError("lim_extract: need at least twice as many samples (" + std::to_string(n) +
                   ") as fit terms (" + std::to_string(t) + ")");
  }
  if (!weights.empty() && static_cast<int>(weights.size()) != n) {
    throw FitError("lim_extract: weight vector size mismatch");
  }

  Matrix a(n, t);
  Vector b(n);
  for (int i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const Complex lm = log_minus(curve.samples[i].lambda);
    a(i, 0) = w;  // constant term a00
    for (int j = 0; j < t - 1; ++j) {
      Complex col = std::exp(terms[j].alpha * lm);
      for (int k = 0; k < terms[j].log_power; ++k) col *= lm;
      a(i, j + 1) = w * col;
    }
    b(i) = w * curve.samples[i].g;
  }

  // column scaling before the SVD solve
  std::vector<double> scale(t);
  for (int j = 0; j < t; ++j) {
    scale[j] = a.col(j).norm();
    if (scale[j] == 0.0) scale[j] = 1.0;
    a.col(j) /= scale[j];
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double cond = svd.singularValues()(0) / svd.singularValues()(t - 1);
  if (cond > 1e12) {
    throw FitError("lim_extract: fit condition number " + std::to_string(cond) + " exceeds 1e12");
  }
  const Vector x = svd.solve(b);
  LimFit fit;
  fit.a00 = x(0) / scale[0];
  fit.residual = (a * x - b).norm();
  fit.condition = cond;
  return fit;
}

Complex canonical_det(const CalderonFrame& frame, const BoundaryProjection& p1,
                      const BoundaryProjection& p2) {
  if ((p1.matrix.array() == p2.matrix.array()).all()) return Complex(1.0, 0.0);
  const WellPosedReport w1 = wellposed_check(p1, frame);
  const WellPosedReport w2 = wellposed_check(p2, frame);
  if (!w1.ok || !w2.ok) {
    throw SolveError("canonical_det: condition not well-posed at lambda=" +
                     std::to_string(frame.lambda().real()));
  }
  const Matrix b1 = range_basis(p1.matrix, p1.rank);
  const Matrix b2 = range_basis(p2.matrix, p2.rank);
  const Matrix s1 = b1.adjoint() * frame.basis;
  const Matrix s2 = b2.adjoint() * frame.basis;
  const Matrix m12 = b1.adjoint() * b2;
  const Matrix pairing = m12 * s2;  // matrix of P1 S(P2)
  Eigen::JacobiSVD<Matrix> svd(pairing);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) < 1e-12 * std::max(1.0, sv(0))) {
    throw BasepointError("canonical_det: basepoint pairing P1 S(P2) is singular");
  }
  const Matrix quotient = pairing.partialPivLu().solve(s1);
  return quotient.partialPivLu().determinant();
}

DeterminantReport relative_zeta_det(const RelDetProblem& problem) {
  DeterminantReport report;
  report.equal_zeta_zero = problem.equal_zeta_zero;

  const HatBuilder builder = [&](Complex lambda) { return hat_system(problem.op, lambda); };
  const CalderonFrame frame0 = calderon_frame(builder(0.0), problem.transport);
  const bool identical = (problem.p1.matrix.array() == problem.p2.matrix.array()).all();
  if (identical) {
    report.curve = lambda_log_curve(builder, problem.p1, problem.p2, problem.ray, problem.transport);
    return report;  // canonical 1, LIM 0, ratio 1 exactly
  }

  const WellPosedReport w1 = wellposed_check(problem.p1, frame0);
  const WellPosedReport w2 = wellposed_check(problem.p2, frame0);
  if (!w1.ok || !w2.ok) {
    throw SolveError("relative_zeta_det: an EBVP is not invertible at lambda = 0");
  }

  report.curve = lambda_log_curve(builder, problem.p1, problem.p2, problem.ray, problem.transport);
  report.branch_winding = report.curve.winding;

  const LimFit fit = lim_extract(report.curve, problem.model);
  report.lim_residual = fit.residual;
  report.lim_condition = fit.condition;

  Complex lim_used = fit.a00;
  if (problem.equal_zeta_zero) {
    AsymptoticModel plain = problem.model;
    plain.decay_only = true;
    const LimFit plain_fit = lim_extract(report.curve, plain);
    report.lim_cross_check_delta = plain_fit.a00 - fit.a00;
    const double tol = 10.0 * std::max(fit.residual, plain_fit.residual) + 1e-9;
    report.plain_limit_consistent = std::abs(report.lim_cross_check_delta) <= tol;
    lim_used = plain_fit.a00;
  }

  const Matrix b1 = range_basis(problem.p1.matrix, problem.p1.rank);
  const Matrix b2 = range_basis(problem.p2.matrix, problem.p2.rank);
  const Complex g0 = log_det(Matrix(b1.adjoint() * frame0.basis)) -
                     log_det(Matrix(b2.adjoint() * frame0.basis));
  report.relative_zeta_det = std::exp(g0 - lim_used);

  // split the basepoint constant back out when P1 S(P2) is invertible so the
  // reported canonical determinant matches the canonical_det operation
  const Matrix m12 = b1.adjoint() * b2;
  Eigen::JacobiSVD<Matrix> svd(Matrix(m12 * (b2.adjoint() * frame0.basis)));
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) >= 1e-12 * std::max(1.0, sv(0))) {
    const Complex logm = log_det(m12);
    report.basepoint_invertible = true;
    report.canonical_det_at_zero = std::exp(g0 - logm);
    report.lim_value = lim_used - logm;
  } else {
    report.basepoint_invertible = false;
    report.canonical_det_at_zero = std::exp(g0);
    report.lim_value = lim_used;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Contour quadrature

namespace {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

Complex pow_negs(double t, Complex s) { return std::exp(-s * std::log(t)); }

}  // namespace

ContourReport contour_zeta(const TraceFn& trace_fn, double theta,
                           const std::vector<Complex>& s_values, const ContourOptions& opts) {
  ContourReport report;
  report.s_values = s_values;

  std::vector<double> gl_x, gl_w;
  gauss_legendre(opts.panel_points, gl_x, gl_w);
  const Complex dir = std::exp(Complex(0.0, theta));

  // cache trace values on the ray panels; extend until the tail is negligible
  struct Node {
    double t;
    double w;
    Complex trace;
  };
  std::vector<Node> ray_nodes;
  double lo = opts.r0;
  double last_panel_mag = 0.0;
  double total_mag = 0.0;
  double used_radius = opts.r0;
  const double smin = -2.0 * opts.richardson_h;  // most demanding exponent
  while (true) {
    const double hi = 2.0 * lo;
    double panel_mag = 0.0;
    for (int i = 0; i < opts.panel_points; ++i) {
      const double t = 0.5 * (hi + lo) + 0.5 * (hi - lo) * gl_x[i];
      const double w = 0.5 * (hi - lo) * gl_w[i];
      const Complex tr = trace_fn(t * dir);
      ray_nodes.push_back({t, w, tr});
      panel_mag += w * std::abs(tr) * std::pow(t, -smin);
    }
    total_mag += panel_mag;
    last_panel_mag = panel_mag;
    used_radius = hi;
    lo = hi;
    if (hi > 2.0 && panel_mag < opts.tail_rel_tol * std::max(total_mag, 1e-300)) break;
    if (hi > opts.max_radius) {
      throw IntegrationError("contour_zeta: ray quadrature did not converge by radius " +
                             std::to_string(hi) + " (last panel magnitude " +
                             std::to_string(last_panel_mag) + ")");
    }
  }
  report.used_radius = used_radius;

  // two-term power tail beyond the last panel
  const Complex tau_end = trace_fn(used_radius * dir);
  const Complex tau_half = trace_fn(0.5 * used_radius * dir);
  // tau(t) ~ d1/t + d2/t^2
  const double t1 = used_radius, t2 = 0.5 * used_radius;
  Eigen::Matrix2cd tail_a;
  tail_a << 1.0 / t1, 1.0 / (t1 * t1), 1.0 / t2, 1.0 / (t2 * t2);
  Eigen::Vector2cd tail_b(tau_end, tau_half);
  const Eigen::Vector2cd tail_c = tail_a.fullPivLu().solve(tail_b);
  report.tail_estimate = std::abs(tail_c(0)) / used_radius;

  // circle nodes
  std::vector<double> circ_x, circ_w;
  gauss_legendre(opts.circle_points, circ_x, circ_w);
  struct CNode {
    double phi;
    double w;
    Complex trace;
  };
  std::vector<CNode> circle_nodes;
  for (int i = 0; i < opts.circle_points; ++i) {
    const double phi = theta - kPi + kPi * circ_x[i];  // [theta - 2pi, theta]
    const double w = kPi * circ_w[i];
    circle_nodes.push_back({phi, w, trace_fn(opts.r0 * std::exp(Complex(0.0, phi)))});
  }

  const auto zeta_at = [&](Complex s) -> Complex {
    Complex ray_int = 0.0;
    for (const auto& node : ray_nodes) ray_int += node.w * pow_negs(node.t, s) * node.trace;
    // analytic tail: int_R^inf t^{-s} (d1 e^{-i theta}/t + d2 e^{-2 i theta}/t^2) dt
    const Complex e1 = std::exp(Complex(0.0, -theta));
    Complex tail = tail_c(0) * e1 * pow_negs(used_radius, s) / s +
                   tail_c(1) * e1 * e1 * pow_negs(used_radius, s + 1.0) / (s + 1.0);
    ray_int += tail;
    const Complex pref =
        (std::exp(-s * Complex(0.0, theta)) - std::exp(-s * Complex(0.0, theta - 2.0 * kPi))) * dir;
    Complex circ = 0.0;
    for (const auto& node : circle_nodes) {
      circ += node.w * std::exp(Complex(0.0, 1.0) * (1.0 - s) * node.phi) * node.trace;
    }
    circ *= Complex(0.0, 1.0) * std::exp((1.0 - s) * std::log(opts.r0));
    return (pref * ray_int + circ) / Complex(0.0, 2.0 * kPi);
  };

  for (Complex s : s_values) report.zeta_values.push_back(zeta_at(s));

  const double h = opts.richardson_h;
  const Complex d1 = (zeta_at(h) - zeta_at(-h)) / (2.0 * h);
  const Complex d2 = (zeta_at(0.5 * h) - zeta_at(-0.5 * h)) / h;
  report.zeta_prime_at_zero = (4.0 * d2 - d1) / 3.0;
  if (std::abs(report.zeta_prime_at_zero - d2) > 1e-4 * (1.0 + std::abs(d2))) {
    throw IntegrationError("contour_zeta: derivative extrapolation did not settle");
  }
  report.det_ratio = std::exp(-report.zeta_prime_at_zero);
  return report;
}

ContourReport relative_zeta_contour(const RelDetProblem& problem,
                                    const std::vector<Complex>& s_values,
                                    const ContourOptions& opts) {
  const TraceFn trace = [&](Complex lambda) {
    return relative_resolvent_trace(hat_system(problem.op, lambda), problem.p1, problem.p2,
                                    problem.transport);
  };
  return contour_zeta(trace, problem.ray.theta, s_values, opts);
}

}  // namespace caldet
