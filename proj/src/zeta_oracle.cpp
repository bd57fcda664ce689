#include "caldet/zeta_oracle.hpp"

#include <algorithm>
#include <cmath>

namespace caldet {

// ---------------------------------------------------------------------------
// Hurwitz zeta by Euler-Maclaurin

namespace {

// B_{2j}/(2j)! for j = 1..8
constexpr double kBernFac[8] = {
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    7.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
};

struct Dual {
  Complex v{0.0};
  Complex d{0.0};
};

Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
Dual operator*(Complex c, const Dual& a) { return {c * a.v, c * a.d}; }

// x^{-s-shift} as a dual in s
Dual power_term(Complex s, double x, double shift) {
  const double lx = std::log(x);
  const Complex p = std::exp(-(s + shift) * lx);
  return {p, -lx * p};
}

ZetaPair hurwitz_core(Complex s, double a) {
  if (std::abs(s - Complex(1.0)) < 1e-9) throw NumericError("hurwitz_zeta: pole at s = 1");
  if (a <= 0.0) throw InputError("hurwitz_zeta: requires a > 0");
  const int K = a >= 16.0 ? 0 : static_cast<int>(std::ceil(16.0 - a));
  Dual acc;
  for (int k = 0; k < K; ++k) acc = acc + power_term(s, a + k, 0.0);
  const double x = a + K;
  const double lx = std::log(x);
  // x^{1-s}/(s-1)
  {
    const Complex p = std::exp((1.0 - s) * lx);
    const Complex den = s - 1.0;
    acc.v += p / den;
    acc.d += -lx * p / den - p / (den * den);
  }
  acc = acc + 0.5 * power_term(s, x, 0.0);
  for (int j = 1; j <= 8; ++j) {
    // Pochhammer s(s+1)...(s+2j-2) as a dual
    Dual poch{1.0, 0.0};
    for (int i = 0; i < 2 * j - 1; ++i) {
      const Dual factor{s + static_cast<double>(i), 1.0};
      poch = poch * factor;
    }
    acc = acc + kBernFac[j - 1] * (poch * power_term(s, x, 2.0 * j - 1.0));
  }
  return {acc.v, acc.d};
}

}  // namespace

Complex hurwitz_zeta(Complex s, double a) { return hurwitz_core(s, a).value; }
ZetaPair hurwitz_zeta_with_ds(Complex s, double a) { return hurwitz_core(s, a); }

// ---------------------------------------------------------------------------
// Characteristic-function scan

namespace {

struct CharScan {
  const OracleProblem* prob;
  Matrix bp;        // fixed orthonormal basis of range(P)
  Complex t0, t1;   // trace integral T(lambda) = t0 + t1 lambda (t1 = 0 for r > 1)
  Complex phase{1.0, 0.0};
  int r;
  bool positive;

  explicit CharScan(const OracleProblem& p) : prob(&p) {
    bp = range_basis(p.condition.matrix, p.condition.rank);
    r = p.op.r();
    positive = p.positive_spectrum;
    t0 = hat_trace_integral(hat_system(p.op, 0.0));
    t1 = r == 1 ? hat_trace_integral(hat_system(p.op, 1.0)) - t0 : Complex(0.0);
  }

  double lambda_of(double x) const {
    if (!positive) return x;
    double v = 1.0;
    for (int i = 0; i < r; ++i) v *= x;
    return v;
  }

  Complex delta(Complex lambda) const {
    return characteristic_det(prob->op, bp, lambda, prob->transport);
  }

  Complex normalized(Complex lambda) const {
    return delta(lambda) * std::exp(-0.5 * (t0 + t1 * lambda));
  }

  double real_char(double x) const { return (phase * normalized(lambda_of(x))).real(); }

  // calibrate the constant phase on sample values and verify realness
  void calibrate(const std::vector<Complex>& samples, double tol) {
    double best = 0.0;
    Complex ref = 1.0;
    for (const auto& c : samples) {
      if (std::abs(c) > best) {
        best = std::abs(c);
        ref = c;
      }
    }
    if (best == 0.0) throw NumericError("oracle: characteristic function vanished on the window");
    phase = std::conj(ref) / std::abs(ref);
    double imax = 0.0;
    for (const auto& c : samples) imax = std::max(imax, std::abs((phase * c).imag()));
    if (imax > tol * best) {
      throw NumericError("oracle: characteristic function is not real up to a constant phase "
                         "(residual " +
                         std::to_string(imax / best) + "); scenario not self-adjoint?");
    }
  }
};

double bisect_root(const CharScan& scan, double lo, double hi, double flo) {
  for (int it = 0; it < 90; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(mid))) return mid;
    const double fm = scan.real_char(mid);
    if (fm == 0.0) return mid;
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// golden-section minimization of |normalized|^2 for even-multiplicity dips
double refine_dip(const CharScan& scan, double lo, double hi) {
  const double gr = 0.61803398874989485;
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  auto f = [&](double x) {
    const Complex v = scan.normalized(scan.lambda_of(x));
    return std::norm(v);
  };
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// winding number of delta around the rectangle [la, lb] x [-h, h]
int rectangle_winding(const CharScan& scan, double la, double lb, double h) {
  const Complex corners[5] = {{la, -h}, {lb, -h}, {lb, h}, {la, h}, {la, -h}};
  double total = 0.0;
  for (int e = 0; e < 4; ++e) {
    // adaptive phase continuation along the edge
    struct Seg {
      Complex z0, z1;
      Complex f0, f1;
      int depth;
    };
    std::vector<Seg> stack;
    stack.push_back({corners[e], corners[e + 1], scan.delta(corners[e]), scan.delta(corners[e + 1]), 0});
    while (!stack.empty()) {
      Seg s = stack.back();
      stack.pop_back();
      if (std::abs(s.f0) == 0.0 || std::abs(s.f1) == 0.0) {
        throw NumericError("winding certificate: characteristic function vanished on the contour");
      }
      const double dphi = std::arg(s.f1 / s.f0);
      const bool small = std::abs(dphi) < 1.2;
      if (small && s.depth >= 3) {
        total += dphi;
        continue;
      }
      if (s.depth > 48) throw NumericError("winding certificate: subdivision limit reached");
      const Complex mid = 0.5 * (s.z0 + s.z1);
      const Complex fm = scan.delta(mid);
      stack.push_back({mid, s.z1, fm, s.f1, s.depth + 1});
      stack.push_back({s.z0, mid, s.f0, fm, s.depth + 1});
    }
  }
  return static_cast<int>(std::llround(total / (2.0 * kPi)));
}

}  // namespace

int SpectrumWindow::total_multiplicity() const {
  int t = 0;
  for (int m : multiplicities) t += m;
  return t;
}

int kernel_dimension(const OracleProblem& problem) {
  const CalderonFrame frame = calderon_frame(hat_system(problem.op, 0.0), problem.transport);
  const Matrix s = s_matrix(frame, problem.condition);
  Eigen::JacobiSVD<Matrix> svd(s);
  int dim = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) < 1e-8) ++dim;
  }
  return dim;
}

SpectrumWindow enumerate_spectrum(const OracleProblem& problem, double window_min,
                                  double window_max, const OracleOptions& opts) {
  if (window_max <= window_min) throw InputError("enumerate_spectrum: empty window");
  CharScan scan(problem);
  const int r = problem.op.r();

  SpectrumWindow out;
  out.window_min = window_min;
  out.window_max = window_max;

  const bool spans_zero = window_min < opts.zero_exclusion && window_max > -opts.zero_exclusion;
  if (spans_zero) {
    out.zero_mode_dim = kernel_dimension(problem);
    out.has_zero_mode = out.zero_mode_dim > 0;
  }

  // scan intervals in the scan variable x (nu for positive-spectrum problems)
  auto to_x = [&](double lambda) {
    return problem.positive_spectrum ? std::pow(lambda, 1.0 / r) : lambda;
  };
  std::vector<std::pair<double, double>> intervals;
  if (problem.positive_spectrum) {
    const double lo = std::max(window_min, out.has_zero_mode ? opts.zero_exclusion : 1e-12);
    intervals.push_back({to_x(lo), to_x(window_max)});
  } else if (out.has_zero_mode) {
    if (window_min < -opts.zero_exclusion) intervals.push_back({window_min, -opts.zero_exclusion});
    if (window_max > opts.zero_exclusion) intervals.push_back({opts.zero_exclusion, window_max});
  } else {
    intervals.push_back({window_min, window_max});
  }

  for (int attempt = 0; attempt <= opts.max_refinements; ++attempt) {
    const double dx = opts.scan_resolution / std::pow(4.0, attempt);
    std::vector<double> roots;
    std::vector<int> mults;

    for (auto [xa, xb] : intervals) {
      const int samples = std::max(8, static_cast<int>(std::ceil((xb - xa) / dx)));
      const double step = (xb - xa) / samples;
      std::vector<Complex> cvals(samples + 1);
      for (int i = 0; i <= samples; ++i) {
        cvals[i] = scan.normalized(scan.lambda_of(xa + i * step));
      }
      scan.calibrate(cvals, opts.realness_tol);
      std::vector<double> vals(samples + 1);
      for (int i = 0; i <= samples; ++i) vals[i] = (scan.phase * cvals[i]).real();
      double scale = 0.0;
      for (double v : vals) scale = std::max(scale, std::abs(v));

      for (int i = 0; i < samples; ++i) {
        if (vals[i] == 0.0) continue;
        if ((vals[i] < 0.0) != (vals[i + 1] < 0.0)) {
          const double x = bisect_root(scan, xa + i * step, xa + (i + 1) * step, vals[i]);
          roots.push_back(scan.lambda_of(x));
          mults.push_back(1);
        } else if (i > 0 && std::abs(vals[i]) < std::abs(vals[i - 1]) &&
                   std::abs(vals[i]) <= std::abs(vals[i + 1]) && std::abs(vals[i]) < 1e-3 * scale) {
          // even-order dip candidate
          const double x = refine_dip(scan, xa + (i - 1) * step, xa + (i + 1) * step);
          const double v = std::abs(scan.real_char(x));
          if (v < 1e-6 * scale) {
            roots.push_back(scan.lambda_of(x));
            mults.push_back(2);
          }
        }
      }
    }

    // sort eigenvalues together with multiplicities
    std::vector<size_t> order(roots.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return roots[a] < roots[b]; });
    out.eigenvalues.clear();
    out.multiplicities.clear();
    for (size_t i : order) {
      out.eigenvalues.push_back(roots[i]);
      out.multiplicities.push_back(mults[i]);
    }

    // completeness certificate over the lambda rectangle
    double gap = out.eigenvalues.size() > 1
                     ? out.eigenvalues[1] - out.eigenvalues[0]
                     : std::max(1.0, std::abs(window_max - window_min) * 0.1);
    for (size_t i = 1; i + 1 < out.eigenvalues.size(); ++i) {
      gap = std::min(gap, out.eigenvalues[i + 1] - out.eigenvalues[i]);
    }
    double la = problem.positive_spectrum
                    ? std::max(window_min, out.has_zero_mode ? opts.zero_exclusion : 1e-12)
                    : window_min;
    double lb = window_max;
    // keep eigenvalues clear of the certificate boundary
    if (!out.eigenvalues.empty()) {
      const double margin = std::max(1e-9, 0.25 * std::max(gap, 1e-6));
      if (out.eigenvalues.front() - la < margin) la = out.eigenvalues.front() - margin;
      if (lb - out.eigenvalues.back() < margin) lb = out.eigenvalues.back() + margin;
      if (problem.positive_spectrum) la = std::max(la, 1e-12);
    }
    const double h = std::max(1e-3, std::min(1.0, 0.25 * std::max(gap, 1e-6)));
    int expected = out.total_multiplicity();
    if (!problem.positive_spectrum && out.has_zero_mode) expected += out.zero_mode_dim;
    int winding = 0;
    bool certified = false;
    try {
      winding = rectangle_winding(scan, la, lb, h);
      certified = winding == expected;
    } catch (const NumericError&) {
      certified = false;
    }
    out.winding_count = winding;
    out.complete = certified;
    if (certified) return out;
  }
  throw IncompleteSpectrumError(
      "enumerate_spectrum: root count " + std::to_string(out.total_multiplicity()) +
      " does not match the argument-principle winding " + std::to_string(out.winding_count));
}

SpectrumWindow enumerate_count(const OracleProblem& problem, int count, const OracleOptions& opts) {
  const int m = problem.op.m();
  const int r = problem.op.r();
  double width = kPi * (count + 6.0) / m;
  for (int attempt = 0; attempt < 3; ++attempt) {
    SpectrumWindow w;
    if (problem.positive_spectrum) {
      double numax = width;
      w = enumerate_spectrum(problem, 0.0, std::pow(numax, r), opts);
    } else {
      const double half = width * 0.5 + kPi;
      w = enumerate_spectrum(problem, -half, half, opts);
    }
    if (w.total_multiplicity() >= count) return w;
    width *= 1.6;
  }
  throw IncompleteSpectrumError("enumerate_count: window growth did not reach the requested count");
}

// ---------------------------------------------------------------------------
// Weyl tail fit and zeta continuation

WeylTailModel fit_weyl_tail(const std::vector<double>& eigenvalues, int r, int period) {
  if (eigenvalues.size() < 16) throw TailError("fit_weyl_tail: too few eigenvalues");
  std::vector<double> mu(eigenvalues.size());
  for (size_t i = 0; i < mu.size(); ++i) {
    if (eigenvalues[i] <= 0.0) throw TailError("fit_weyl_tail: eigenvalues must be positive");
    mu[i] = std::pow(eigenvalues[i], 1.0 / r);
  }

  auto fit_for_period = [&](int p) {
    WeylTailModel model;
    model.r = r;
    model.period = p;
    model.residual = 0.0;
    const size_t start = mu.size() / 2;
    for (int j = 0; j < p; ++j) {
      // class-local pairs (t, mu_{p t + j}) over the tail half
      std::vector<double> ts, ys;
      for (size_t n = start; n < mu.size(); ++n) {
        if (static_cast<int>(n % p) != j) continue;
        ts.push_back(static_cast<double>(n / p));
        ys.push_back(mu[n]);
      }
      if (ts.size() < 4) throw TailError("fit_weyl_tail: class has too few points");
      WeylClassFit fit;
      for (int pass = 0; pass < 3; ++pass) {
        double sw = 0, st = 0, stt = 0, sy = 0, sty = 0;
        for (size_t i = 0; i < ts.size(); ++i) {
          double y = ys[i];
          if (pass > 0) y -= fit.c / (fit.a * ts[i] + fit.b);
          sw += 1.0;
          st += ts[i];
          stt += ts[i] * ts[i];
          sy += y;
          sty += ts[i] * y;
        }
        const double det = sw * stt - st * st;
        fit.a = (sw * sty - st * sy) / det;
        fit.b = (stt * sy - st * sty) / det;
        double cn = 0, cd = 0;
        for (size_t i = 0; i < ts.size(); ++i) {
          const double base = fit.a * ts[i] + fit.b;
          cn += (ys[i] - base) * base;
          cd += 1.0;
        }
        fit.c = cn / cd;
      }
      for (size_t i = 0; i < ts.size(); ++i) {
        const double base = fit.a * ts[i] + fit.b;
        model.residual = std::max(model.residual, std::abs(ys[i] - base - fit.c / base));
      }
      model.classes.push_back(fit);
    }
    return model;
  };

  if (period > 0) return fit_for_period(period);
  WeylTailModel m1 = fit_for_period(1);
  WeylTailModel m2 = fit_for_period(2);
  return m2.residual < 0.1 * m1.residual ? m2 : m1;
}

namespace {

// zeta(s) with s-derivative: head sum over the computed spectrum plus the
// per-class Hurwitz tails of the fitted Weyl law.
Dual zeta_dual(Complex s, const std::vector<double>& eigenvalues, const std::vector<int>& mult,
               int r, const WeylTailModel* tail) {
  Dual acc;
  int head = 0;
  for (size_t i = 0; i < eigenvalues.size(); ++i) {
    const int m = mult[i];
    head += m;
    acc = acc + static_cast<double>(m) * power_term(s, eigenvalues[i], 0.0);
  }
  if (tail == nullptr) return acc;

  const Complex rs = static_cast<double>(r) * s;
  const Dual rs_d{rs, static_cast<double>(r)};
  for (int j = 0; j < tail->period; ++j) {
    const auto& f = tail->classes[j];
    int t_start = (head - j + tail->period - 1) / tail->period;
    double x0 = t_start + f.b / f.a;
    while (x0 <= 0.5) {
      x0 += 1.0;
      ++t_start;  // unreachable for sane fits; keeps Hurwitz argument positive
    }
    auto hz = [&](double shift) -> Dual {
      const ZetaPair z = hurwitz_zeta_with_ds(rs + shift, x0);
      return {z.value, static_cast<double>(r) * z.ds};
    };
    auto apow = [&](double shift) -> Dual {
      const double la = std::log(f.a);
      const Complex p = std::exp(-(rs + shift) * la);
      return {p, -static_cast<double>(r) * la * p};
    };
    const Dual term1 = apow(0.0) * hz(0.0);
    const Dual term2 = Complex(-f.c) * (rs_d * (apow(2.0) * hz(2.0)));
    const Dual half{0.5 * f.c * f.c, 0.0};
    const Dual rs1{rs + 1.0, static_cast<double>(r)};
    const Dual term3 = half * (rs_d * (rs1 * (apow(4.0) * hz(4.0))));
    acc = acc + term1 + term2 + term3;
  }
  return acc;
}

}  // namespace

ZetaReport zeta_values(const std::vector<double>& eigenvalues, const std::vector<int>& multiplicities,
                       int r, const std::vector<Complex>& s_grid, const ZetaOptions& opts) {
  if (eigenvalues.empty()) throw InputError("zeta_values: empty spectrum");
  if (multiplicities.size() != eigenvalues.size()) {
    throw InputError("zeta_values: multiplicity list size mismatch");
  }
  for (double ev : eigenvalues) {
    if (ev <= 0.0) throw InputError("zeta_values: eigenvalues must be strictly positive");
  }
  ZetaReport report;
  report.head_count = 0;
  for (int m : multiplicities) report.head_count += m;
  const WeylTailModel* tail = nullptr;
  if (opts.use_tail) {
    report.tail = fit_weyl_tail(eigenvalues, r, opts.period);
    const double rel = report.tail.residual / report.tail.classes.front().a;
    if (rel > opts.tail_residual_tol) {
      throw TailError("zeta_values: Weyl tail fit residual " + std::to_string(rel) +
                      " above threshold");
    }
    tail = &report.tail;
  }
  report.s_values = s_grid;
  for (Complex s : s_grid) {
    report.zeta_samples.push_back(zeta_dual(s, eigenvalues, multiplicities, r, tail).v);
  }
  return report;
}

ZetaReport zeta_det(const ZetaReport& partial, const std::vector<double>& eigenvalues,
                    const std::vector<int>& multiplicities, int r, const ZetaOptions& opts) {
  ZetaReport report = partial;
  const WeylTailModel* tail = opts.use_tail ? &report.tail : nullptr;
  auto z = [&](double s) { return zeta_dual(Complex(s, 0.0), eigenvalues, multiplicities, r, tail).v; };

  const double h = opts.richardson_h;
  const Complex zp = z(h), zm = z(-h), zp2 = z(0.5 * h), zm2 = z(-0.5 * h);
  const Complex d1 = (zp - zm) / (2.0 * h);
  const Complex d2 = (zp2 - zm2) / h;
  const Complex deriv = (4.0 * d2 - d1) / 3.0;
  const Complex a1 = 0.5 * (zp + zm);
  const Complex a2 = 0.5 * (zp2 + zm2);
  const Complex at0 = (4.0 * a2 - a1) / 3.0;
  if (std::abs(deriv - d2) > 1e-5 * (1.0 + std::abs(deriv))) {
    throw ContinuationError("zeta_det: Richardson extrapolation did not converge");
  }
  if (std::abs(at0.imag()) > 1e-8 || std::abs(deriv.imag()) > 1e-8) {
    throw ContinuationError("zeta_det: continuation produced a non-real value at s = 0");
  }
  report.zeta_at_zero = at0.real();
  report.zeta_prime_at_zero = deriv.real();
  report.det_zeta = std::exp(-report.zeta_prime_at_zero);
  report.determinant_ready = true;
  return report;
}

ZetaReport spectral_zeta_det(const std::vector<double>& eigenvalues,
                             const std::vector<int>& multiplicities, int r,
                             const ZetaOptions& opts) {
  const ZetaReport partial = zeta_values(eigenvalues, multiplicities, r, {}, opts);
  return zeta_det(partial, eigenvalues, multiplicities, r, opts);
}

}  // namespace caldet
