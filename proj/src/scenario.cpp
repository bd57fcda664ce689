#include "caldet/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace caldet {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InputError("scenario" + where + ": " + what);
}

void check_keys(const ordered_json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) fail(where, "unknown key '" + it.key() + "'");
  }
}

Complex parse_complex(const ordered_json& j, const std::string& where) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return Complex(j[0].get<double>(), j[1].get<double>());
  }
  fail(where, "expected a number or [re, im] pair");
}

Matrix parse_matrix(const ordered_json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty matrix");
  const size_t rows = j.size();
  size_t cols = 0;
  Matrix out;
  for (size_t i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.empty()) fail(where, "row " + std::to_string(i) + " is not an array");
    if (i == 0) {
      cols = row.size();
      out.resize(rows, cols);
    } else if (row.size() != cols) {
      fail(where, "ragged matrix at row " + std::to_string(i));
    }
    for (size_t k = 0; k < cols; ++k) {
      out(i, k) = parse_complex(row[k], where + "/" + std::to_string(i) + "/" + std::to_string(k));
    }
  }
  return out;
}

Coefficient parse_coefficient(const ordered_json& j, const std::string& where) {
  check_keys(j, {"kind", "matrix", "coeffs"}, where);
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant") {
    if (!j.contains("matrix")) fail(where, "constant coefficient needs 'matrix'");
    return Coefficient::constant(parse_matrix(j.at("matrix"), where + "/matrix"));
  }
  if (kind == "polynomial") {
    if (!j.contains("coeffs")) fail(where, "polynomial coefficient needs 'coeffs'");
    std::vector<Matrix> coeffs;
    for (size_t k = 0; k < j.at("coeffs").size(); ++k) {
      coeffs.push_back(parse_matrix(j.at("coeffs")[k], where + "/coeffs/" + std::to_string(k)));
    }
    return Coefficient::polynomial(std::move(coeffs));
  }
  fail(where, "unknown coefficient kind '" + kind + "'");
}

DiracFactor twisted_dirac_factor(Complex a) {
  Matrix sigma(1, 1), coeff(1, 1);
  sigma(0, 0) = Complex(0.0, -1.0);
  coeff(0, 0) = a;
  return make_dirac_factor(sigma, Coefficient::constant(coeff));
}

DiracFactor d_du_factor() {
  Matrix sigma(1, 1), coeff(1, 1);
  sigma(0, 0) = 1.0;
  coeff(0, 0) = 0.0;
  return make_dirac_factor(sigma, Coefficient::constant(coeff));
}

ComposedOperator parse_operator(const ordered_json& j, const std::string& where) {
  if (j.is_string()) {
    const std::string preset = j.get<std::string>();
    if (preset == "d_du") return compose({d_du_factor()});
    if (preset == "laplace_dirichlet_pair") {
      return compose({twisted_dirac_factor(0.0), twisted_dirac_factor(0.0)});
    }
    fail(where, "unknown operator preset '" + preset + "'");
  }
  check_keys(j, {"preset", "a", "m", "factors"}, where);
  if (j.contains("preset")) {
    const std::string preset = j.at("preset").get<std::string>();
    if (preset == "d_du") return compose({d_du_factor()});
    if (preset == "twisted_dirac") {
      const Complex a = j.contains("a") ? parse_complex(j.at("a"), where + "/a") : Complex(0.0);
      return compose({twisted_dirac_factor(a)});
    }
    if (preset == "laplace_dirichlet_pair") {
      return compose({twisted_dirac_factor(0.0), twisted_dirac_factor(0.0)});
    }
    fail(where, "unknown operator preset '" + preset + "'");
  }
  if (!j.contains("factors")) fail(where, "operator needs 'factors' or 'preset'");
  std::vector<DiracFactor> factors;
  for (size_t i = 0; i < j.at("factors").size(); ++i) {
    const auto& jf = j.at("factors")[i];
    const std::string fw = where + "/factors/" + std::to_string(i);
    check_keys(jf, {"sigma", "coeff", "constant_near_boundary"}, fw);
    if (!jf.contains("sigma") || !jf.contains("coeff")) fail(fw, "factor needs 'sigma' and 'coeff'");
    const Matrix sigma = parse_matrix(jf.at("sigma"), fw + "/sigma");
    Coefficient coeff = parse_coefficient(jf.at("coeff"), fw + "/coeff");
    factors.push_back(
        make_dirac_factor(sigma, std::move(coeff), jf.value("constant_near_boundary", true)));
  }
  return compose(std::move(factors));
}

Matrix tangential_block(const ComposedOperator& op, double u) {
  const int r = op.r();
  const int m = op.m();
  Matrix a = Matrix::Zero(r * m, r * m);
  for (int i = 0; i < r; ++i) a.block(i * m, i * m, m, m) = op.factors[i].coeff.at(u);
  return a;
}

BoundaryProjection parse_condition(const ordered_json& j, const ComposedOperator& op,
                                   const std::string& where) {
  const int n = op.trace_dim();
  if (j.is_string()) {
    const std::string kind = j.get<std::string>();
    if (kind == "aps") return aps_projection(tangential_block(op, 0.0), tangential_block(op, 1.0));
    if (kind == "anti_aps") {
      return anti_aps_projection(tangential_block(op, 0.0), tangential_block(op, 1.0));
    }
    if (kind == "dirichlet") return dirichlet_projection(op.r(), op.m());
    if (kind == "neumann") return neumann_projection(op.r(), op.m());
    fail(where, "unknown condition '" + kind + "'");
  }
  check_keys(j, {"kind", "theta", "matrix"}, where);
  const std::string kind = j.value("kind", "");
  if (kind == "twisted") {
    if (!j.contains("theta")) fail(where, "twisted condition needs 'theta'");
    return twisted_projection(j.at("theta").get<double>(), n);
  }
  if (kind == "custom") {
    if (!j.contains("matrix")) fail(where, "custom condition needs 'matrix'");
    const Matrix p = parse_matrix(j.at("matrix"), where + "/matrix");
    if (p.rows() != 2 * n) fail(where, "condition matrix must be 2N x 2N with N = r m");
    return make_projection(p);
  }
  if (kind == "aps") return aps_projection(tangential_block(op, 0.0), tangential_block(op, 1.0));
  if (kind == "anti_aps") {
    return anti_aps_projection(tangential_block(op, 0.0), tangential_block(op, 1.0));
  }
  if (kind == "dirichlet") return dirichlet_projection(op.r(), op.m());
  if (kind == "neumann") return neumann_projection(op.r(), op.m());
  fail(where, "unknown condition kind '" + kind + "'");
}

}  // namespace

DiracFactor shifted_factor(const DiracFactor& base, Complex b) {
  Matrix shift = b * Matrix::Identity(base.m, base.m);
  if (base.coeff.is_polynomial()) {
    std::vector<Matrix> coeffs;
    for (int k = 0; k <= base.coeff.degree(); ++k) {
      Matrix ak = base.coeff.derivative_at(0.0, k);
      double fac = 1.0;
      for (int i = 2; i <= k; ++i) fac *= i;
      coeffs.push_back(Matrix(ak / fac));
    }
    coeffs[0] += shift;
    return make_dirac_factor(base.sigma, Coefficient::polynomial(std::move(coeffs)),
                             base.constant_near_boundary);
  }
  const Coefficient inner = base.coeff;
  return make_dirac_factor(
      base.sigma,
      Coefficient::callable([inner, shift](double u) { return Matrix(inner.at(u) + shift); },
                            base.m),
      base.constant_near_boundary);
}

Scenario parse_scenario(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("scenario: JSON parse error: ") + e.what());
  }
  check_keys(j,
             {"name", "operator", "conditions", "ray", "fit", "oracle", "flags", "steps", "family",
              "contour"},
             "");
  Scenario sc;
  sc.name = j.value("name", "scenario");
  if (!j.contains("operator")) fail("", "missing 'operator'");
  sc.op = parse_operator(j.at("operator"), "/operator");

  if (!j.contains("conditions")) fail("", "missing 'conditions'");
  const auto& jc = j.at("conditions");
  check_keys(jc, {"p1", "p2"}, "/conditions");
  if (!jc.contains("p1") || !jc.contains("p2")) fail("/conditions", "need both 'p1' and 'p2'");
  sc.p1 = parse_condition(jc.at("p1"), sc.op, "/conditions/p1");
  sc.p2 = parse_condition(jc.at("p2"), sc.op, "/conditions/p2");

  sc.ray = RayConfig::for_order(sc.op.r());
  if (j.contains("ray")) {
    const auto& jr = j.at("ray");
    check_keys(jr, {"theta", "radii", "min_gap"}, "/ray");
    if (jr.contains("theta")) sc.ray.theta = jr.at("theta").get<double>();
    if (jr.contains("min_gap")) sc.ray.min_gap = jr.at("min_gap").get<double>();
    if (jr.contains("radii")) {
      const auto& jrad = jr.at("radii");
      if (jrad.is_array()) {
        sc.ray.radii = jrad.get<std::vector<double>>();
      } else {
        check_keys(jrad, {"min", "max", "count"}, "/ray/radii");
        sc.ray.radii = RayConfig::geometric(jrad.value("min", 10.0), jrad.value("max", 1000.0),
                                            jrad.value("count", 24));
      }
    }
  }

  sc.model = AsymptoticModel::for_order(sc.op.r());
  if (j.contains("fit")) {
    const auto& jf = j.at("fit");
    check_keys(jf, {"exponents", "log_exponents", "include_log"}, "/fit");
    if (jf.contains("exponents")) sc.model.exponent_count = jf.at("exponents").get<int>();
    if (jf.contains("log_exponents")) sc.model.log_exponent_count = jf.at("log_exponents").get<int>();
    if (jf.contains("include_log")) sc.model.include_log = jf.at("include_log").get<bool>();
  }

  if (j.contains("oracle")) {
    const auto& jo = j.at("oracle");
    check_keys(jo, {"head_count", "window", "s_grid", "period"}, "/oracle");
    if (jo.contains("head_count")) sc.oracle.head_count = jo.at("head_count").get<int>();
    if (jo.contains("period")) sc.oracle.period = jo.at("period").get<int>();
    if (jo.contains("s_grid")) sc.oracle.s_grid = jo.at("s_grid").get<std::vector<double>>();
    if (jo.contains("window")) {
      const auto w = jo.at("window").get<std::vector<double>>();
      if (w.size() != 2) fail("/oracle/window", "expected [min, max]");
      sc.oracle.window = {w[0], w[1]};
    }
  }

  if (j.contains("flags")) {
    const auto& jf = j.at("flags");
    check_keys(jf, {"self_adjoint", "equal_zeta_zero"}, "/flags");
    sc.self_adjoint = jf.value("self_adjoint", false);
    sc.equal_zeta_zero = jf.value("equal_zeta_zero", false);
  }

  if (j.contains("steps")) {
    sc.transport.steps = j.at("steps").get<int>();
    if (sc.transport.steps < 16) fail("/steps", "steps must be >= 16");
  }

  if (j.contains("family")) {
    const auto& jf = j.at("family");
    check_keys(jf, {"center", "h", "n"}, "/family");
    FamilySpec spec;
    if (jf.contains("center")) spec.center = parse_complex(jf.at("center"), "/family/center");
    if (jf.contains("h")) spec.h = jf.at("h").get<double>();
    if (jf.contains("n")) spec.n = jf.at("n").get<int>();
    sc.family = spec;
  }

  if (j.contains("contour")) {
    const auto& jc2 = j.at("contour");
    check_keys(jc2, {"r0", "max_radius"}, "/contour");
    if (jc2.contains("r0")) sc.contour.r0 = jc2.at("r0").get<double>();
    if (jc2.contains("max_radius")) sc.contour.max_radius = jc2.at("max_radius").get<double>();
  }
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str());
}

void attach_oracle_ratio(DeterminantReport& report, const Scenario& scenario) {
  OracleConfig cfg;
  cfg.head_count = scenario.oracle.head_count;
  cfg.zeta.period = scenario.oracle.period;
  cfg.transport = scenario.transport;
  const int r = scenario.op.r();
  if (r == 1) {
    // first-order operators: Laplacian route, ||det||^2_zeta = det_zeta(Delta)
    const double q1 = quillen_metric(dirac_laplacian(scenario.op.factors[0], scenario.p1), cfg);
    const double q2 = quillen_metric(dirac_laplacian(scenario.op.factors[0], scenario.p2), cfg);
    const double ratio = q1 / q2;
    report.oracle_ratio = ratio;
    report.oracle_rel_error = std::abs(std::norm(report.relative_zeta_det) / ratio - 1.0);
    return;
  }
  OracleProblem prob1{scenario.op, scenario.p1, r % 2 == 0, scenario.transport};
  OracleProblem prob2{scenario.op, scenario.p2, r % 2 == 0, scenario.transport};
  ZetaOptions zopts;
  zopts.period = scenario.oracle.period;
  const SpectrumWindow s1 = enumerate_count(prob1, scenario.oracle.head_count);
  const SpectrumWindow s2 = enumerate_count(prob2, scenario.oracle.head_count);
  const ZetaReport z1 = spectral_zeta_det(s1.eigenvalues, s1.multiplicities, r, zopts);
  const ZetaReport z2 = spectral_zeta_det(s2.eigenvalues, s2.multiplicities, r, zopts);
  const double ratio = z1.det_zeta / z2.det_zeta;
  report.oracle_ratio = ratio;
  report.oracle_rel_error = std::abs(report.relative_zeta_det / ratio - 1.0);
}

namespace {

Complex log_det_ratio_at(const Scenario& sc, Complex lambda) {
  const HatSystem hat = hat_system(sc.op, lambda);
  const Matrix frame = stable_frame_basis(hat, sc.transport);
  const Matrix b1 = range_basis(sc.p1.matrix, sc.p1.rank);
  const Matrix b2 = range_basis(sc.p2.matrix, sc.p2.rank);
  return log_det(Matrix(b1.adjoint() * frame)) - log_det(Matrix(b2.adjoint() * frame));
}

// d/dlambda of the log det ratio via a Richardson stencil along the ray,
// unwrapping principal-branch jumps between stencil points.
Complex ray_derivative(const Scenario& sc, Complex lambda, Complex dir) {
  const double scale = std::max(1.0, std::abs(lambda));
  const double d = 1e-4 * scale;
  const auto diff = [&](double step) {
    Complex gp = log_det_ratio_at(sc, lambda + step * dir);
    Complex gm = log_det_ratio_at(sc, lambda - step * dir);
    Complex delta = gp - gm;
    delta -= Complex(0.0, 2.0 * kPi * std::round(delta.imag() / (2.0 * kPi)));
    return delta / (2.0 * step * dir);
  };
  const Complex d1 = diff(d);
  const Complex d2 = diff(0.5 * d);
  return (4.0 * d2 - d1) / 3.0;
}

CommandResult do_describe(const Scenario& sc) {
  CommandResult result;
  const CalderonFrame frame = calderon_frame(hat_system(sc.op, 0.0), sc.transport);
  const WellPosedReport w1 = wellposed_check(sc.p1, frame);
  const WellPosedReport w2 = wellposed_check(sc.p2, frame);
  Json j;
  j["schema"] = "caldet-report/1";
  j["scenario"] = sc.name;
  j["kind"] = "describe";
  j["r"] = sc.op.r();
  j["m"] = sc.op.m();
  j["N"] = sc.op.trace_dim();
  j["rank_p1"] = sc.p1.rank;
  j["rank_p2"] = sc.p2.rank;
  j["wellposed_p1"] = w1.ok;
  j["wellposed_p2"] = w2.ok;
  j["smallest_singular_p1"] = w1.smallest();
  j["smallest_singular_p2"] = w2.smallest();
  j["ray_theta"] = sc.ray.theta;
  j["self_adjoint"] = sc.self_adjoint;
  j["equal_zeta_zero"] = sc.equal_zeta_zero;
  result.report = j;
  std::ostringstream os;
  os << sc.name << ": r=" << sc.op.r() << " m=" << sc.op.m() << " N=" << sc.op.trace_dim()
     << " rank(P1)=" << sc.p1.rank << " rank(P2)=" << sc.p2.rank
     << " wellposed=" << (w1.ok ? "yes" : "no") << "/" << (w2.ok ? "yes" : "no");
  result.summary = os.str();
  return result;
}

CommandResult do_spectrum(const Scenario& sc, const CommandOverrides& overrides) {
  CommandResult result;
  OracleProblem prob{sc.op, sc.p1, sc.op.r() % 2 == 0, sc.transport};
  const int count = overrides.count.value_or(sc.oracle.head_count);
  SpectrumWindow window = sc.oracle.window
                              ? enumerate_spectrum(prob, sc.oracle.window->first,
                                                   sc.oracle.window->second)
                              : enumerate_count(prob, count);
  result.report = report_json(window, sc.name);
  result.files["spectrum.csv"] = spectrum_csv(window);
  std::ostringstream os;
  os << sc.name << ": " << window.total_multiplicity() << " eigenvalues in ["
     << window.window_min << ", " << window.window_max << "], winding "
     << window.winding_count << (window.complete ? " (certified)" : " (NOT certified)");
  result.summary = os.str();
  return result;
}

CommandResult do_canonical_det(const Scenario& sc) {
  CommandResult result;
  const CalderonFrame frame = calderon_frame(hat_system(sc.op, 0.0), sc.transport);
  const Complex value = canonical_det(frame, sc.p1, sc.p2);
  Json j;
  j["schema"] = "caldet-report/1";
  j["scenario"] = sc.name;
  j["kind"] = "canonical-det";
  j["value"] = json_complex(value);
  result.report = j;
  std::ostringstream os;
  os << sc.name << ": canonical det = " << value.real() << (value.imag() < 0 ? " - " : " + ")
     << std::abs(value.imag()) << "i";
  result.summary = os.str();
  return result;
}

RelDetProblem make_problem(const Scenario& sc) {
  return RelDetProblem{sc.op, sc.p1, sc.p2, sc.ray, sc.model, sc.equal_zeta_zero, sc.transport};
}

CommandResult do_relative_det(const Scenario& sc, const CommandOverrides& overrides) {
  CommandResult result;
  DeterminantReport report = relative_zeta_det(make_problem(sc));
  if (sc.self_adjoint) attach_oracle_ratio(report, sc);
  result.report = report_json(report, sc.name);
  if (overrides.with_contour) {
    std::vector<Complex> svals;
    for (double s : sc.oracle.s_grid) svals.push_back(Complex(s, 0.0));
    const ContourReport contour = relative_zeta_contour(make_problem(sc), svals, sc.contour);
    result.report["contour"] = report_json(contour, sc.name);
    const double cross = std::abs(contour.det_ratio - report.relative_zeta_det) /
                         std::abs(report.relative_zeta_det);
    result.report["contour_cross_check_rel_error"] = cross;
  }
  result.files["curve.csv"] = curve_csv(report.curve);
  std::ostringstream os;
  os << sc.name << ": relative zeta det = (" << report.relative_zeta_det.real() << ", "
     << report.relative_zeta_det.imag() << "i)";
  if (report.oracle_rel_error) os << ", oracle rel err " << *report.oracle_rel_error;
  result.summary = os.str();
  return result;
}

CommandResult do_verify_parametrix(const Scenario& sc, const CommandOverrides& overrides) {
  CommandResult result;
  const double tol = overrides.tol.value_or(1e-6);
  const Complex dir = std::exp(Complex(0.0, sc.ray.theta));

  std::vector<double> exclusions;
  if (sc.self_adjoint && std::abs(std::sin(sc.ray.theta)) < 1e-12) {
    // the ray lies on the real axis; stay min_gap clear of the spectrum
    OracleProblem prob{sc.op, sc.p1, sc.op.r() % 2 == 0, sc.transport};
    OracleProblem prob2{sc.op, sc.p2, sc.op.r() % 2 == 0, sc.transport};
    const double rmax = sc.ray.radii.back() * 1.1;
    for (const auto& p : {prob, prob2}) {
      if (p.positive_spectrum && std::cos(sc.ray.theta) < 0) continue;  // spectrum off the ray
      try {
        const SpectrumWindow w = enumerate_spectrum(p, -rmax, rmax);
        exclusions.insert(exclusions.end(), w.eigenvalues.begin(), w.eigenvalues.end());
      } catch (const NumericError&) {
        // fall back to the singular-value guard inside the evaluations
      }
    }
  }

  Json rows = Json::array();
  double max_resid = 0.0;
  int used = 0;
  for (double radius : sc.ray.radii) {
    const Complex lambda = radius * dir;
    bool excluded = false;
    for (double ev : exclusions) {
      if (std::abs(lambda - Complex(ev, 0.0)) < sc.ray.min_gap) excluded = true;
    }
    if (excluded) continue;
    const Complex trace =
        relative_resolvent_trace(hat_system(sc.op, lambda), sc.p1, sc.p2, sc.transport);
    const Complex deriv = ray_derivative(sc, lambda, dir);
    // Tr{R1 - R2} = -d/dlambda log det ratio
    const double resid = std::abs(trace + deriv) / std::max(std::abs(deriv), 1e-300);
    max_resid = std::max(max_resid, resid);
    ++used;
    rows.push_back(Json::array({radius, trace.real(), trace.imag(), -deriv.real(), -deriv.imag(),
                                resid}));
  }
  Json j;
  j["schema"] = "caldet-report/1";
  j["scenario"] = sc.name;
  j["kind"] = "verify-parametrix";
  j["columns"] = "radius, re_trace, im_trace, re_minus_dlog, im_minus_dlog, rel_residual";
  j["rows"] = rows;
  j["samples_used"] = used;
  j["max_rel_residual"] = max_resid;
  j["tolerance"] = tol;
  result.report = j;
  result.exit_code = (used > 0 && max_resid < tol) ? 0 : 3;
  std::ostringstream os;
  os << sc.name << ": parametrix identity max rel residual " << max_resid << " over " << used
     << " samples (tol " << tol << ")";
  result.summary = os.str();
  return result;
}

CommandResult do_verify_thm1(const Scenario& sc, const CommandOverrides& overrides) {
  CommandResult result;
  const double tol = overrides.tol.value_or(1e-5);
  DeterminantReport report = relative_zeta_det(make_problem(sc));
  attach_oracle_ratio(report, sc);
  result.report = report_json(report, sc.name);
  result.report["kind"] = "verify-thm1";
  result.report["tolerance"] = tol;
  result.exit_code = report.oracle_rel_error && *report.oracle_rel_error < tol ? 0 : 3;
  std::ostringstream os;
  os << sc.name << ": Theorem 1 closure rel error "
     << (report.oracle_rel_error ? *report.oracle_rel_error : -1.0) << " (tol " << tol << ")";
  result.summary = os.str();
  return result;
}

CommandResult do_metrics(const Scenario& sc) {
  if (sc.op.r() != 1) throw InputError("metrics: requires a first-order operator");
  CommandResult result;
  OracleConfig cfg;
  cfg.head_count = sc.oracle.head_count;
  cfg.zeta.period = sc.oracle.period;
  cfg.transport = sc.transport;
  const MetricRatioReport report = metric_ratio_check(sc.op.factors[0], sc.p1, sc.p2, cfg);
  result.report = report_json(report, sc.name);
  std::ostringstream os;
  os << sc.name << ": zeta ratio " << report.zeta_ratio << ", canonical ratio "
     << report.canonical_ratio << ", discrepancy " << report.discrepancy;
  result.summary = os.str();
  return result;
}

CommandResult do_curvature(const Scenario& sc) {
  if (!sc.family) throw InputError("curvature: scenario has no 'family' block");
  if (sc.op.r() != 1) throw InputError("curvature: requires a first-order operator family");
  CommandResult result;
  OracleConfig cfg;
  cfg.head_count = sc.oracle.head_count;
  cfg.zeta.period = sc.oracle.period;
  cfg.transport = sc.transport;
  const DiracFactor base = sc.op.factors[0];
  FamilyGrid grid{[base](Complex b) { return shifted_factor(base, b); },
                  sc.family->center,
                  sc.family->h,
                  sc.family->n,
                  sc.p1,
                  sc.p2};
  const CurvatureReport report = curvature_difference(grid, cfg);
  result.report = report_json(report, sc.name);
  result.files["grid.csv"] = grid_csv(report);
  std::ostringstream os;
  os << sc.name << ": curvature-difference discrepancy " << report.max_discrepancy << " on "
     << report.n << "x" << report.n << " grid (h=" << report.h << ")";
  result.summary = os.str();
  return result;
}

}  // namespace

CommandResult run_command(const std::string& command, Scenario scenario,
                          const CommandOverrides& overrides) {
  if (overrides.steps) scenario.transport.steps = *overrides.steps;
  if (overrides.radii) {
    const auto& [lo, hi, count] = *overrides.radii;
    scenario.ray.radii = RayConfig::geometric(lo, hi, count);
  }
  if (overrides.fit_terms) scenario.model.exponent_count = *overrides.fit_terms;

  if (command == "describe") return do_describe(scenario);
  if (command == "spectrum") return do_spectrum(scenario, overrides);
  if (command == "canonical-det") return do_canonical_det(scenario);
  if (command == "relative-det") return do_relative_det(scenario, overrides);
  if (command == "verify-parametrix") return do_verify_parametrix(scenario, overrides);
  if (command == "verify-thm1") return do_verify_thm1(scenario, overrides);
  if (command == "metrics") return do_metrics(scenario);
  if (command == "curvature") return do_curvature(scenario);
  throw InputError("unknown command '" + command + "'");
}

}  // namespace caldet
