#include "caldet/emit.hpp"

#include <cstdio>
#include <fstream>

namespace caldet {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Json json_complex(Complex z) { return Json::array({z.real(), z.imag()}); }

Json report_json(const DeterminantReport& report, const std::string& scenario_name) {
  Json j;
  j["schema"] = "caldet-report/1";
  j["scenario"] = scenario_name;
  j["kind"] = "relative-det";
  j["canonical_det_at_zero"] = json_complex(report.canonical_det_at_zero);
  j["lim_value"] = json_complex(report.lim_value);
  j["lim_residual"] = report.lim_residual;
  j["lim_condition"] = report.lim_condition;
  j["relative_zeta_det"] = json_complex(report.relative_zeta_det);
  j["branch_winding"] = report.branch_winding;
  j["basepoint_invertible"] = report.basepoint_invertible;
  j["equal_zeta_zero"] = report.equal_zeta_zero;
  if (report.equal_zeta_zero) {
    j["plain_limit_consistent"] = report.plain_limit_consistent;
    j["lim_cross_check_delta"] = json_complex(report.lim_cross_check_delta);
  }
  if (report.oracle_ratio) {
    j["oracle_ratio"] = *report.oracle_ratio;
    j["oracle_rel_error"] = *report.oracle_rel_error;
  }
  Json samples = Json::array();
  for (const auto& s : report.curve.samples) {
    samples.push_back(Json::array(
        {std::abs(s.lambda), s.g.real(), s.g.imag()}));
  }
  j["curve"] = samples;
  return j;
}

Json report_json(const MetricRatioReport& report, const std::string& scenario_name) {
  Json j;
  j["schema"] = "caldet-report/1";
  j["scenario"] = scenario_name;
  j["kind"] = "metrics";
  j["canonical_p1"] = report.canonical_p1;
  j["canonical_p2"] = report.canonical_p2;
  j["quillen_p1"] = report.quillen_p1;
  j["quillen_p2"] = report.quillen_p2;
  j["zeta_ratio"] = report.zeta_ratio;
  j["canonical_ratio"] = report.canonical_ratio;
  j["discrepancy"] = report.discrepancy;
  return j;
}

Json report_json(const CurvatureReport& report, const std::string& scenario_name) {
  Json j;
  j["schema"] = "caldet-report/1";
  j["scenario"] = scenario_name;
  j["kind"] = "curvature";
  j["grid_n"] = report.n;
  j["grid_h"] = report.h;
  j["cr_residual"] = report.cr_residual;
  j["max_discrepancy"] = report.max_discrepancy;
  j["diff_zeta"] = report.diff_zeta;
  j["diff_canonical"] = report.diff_canonical;
  return j;
}

Json report_json(const SpectrumWindow& window, const std::string& scenario_name) {
  Json j;
  j["schema"] = "caldet-report/1";
  j["scenario"] = scenario_name;
  j["kind"] = "spectrum";
  j["window"] = Json::array({window.window_min, window.window_max});
  j["count"] = window.total_multiplicity();
  j["winding_count"] = window.winding_count;
  j["complete"] = window.complete;
  j["has_zero_mode"] = window.has_zero_mode;
  j["zero_mode_dim"] = window.zero_mode_dim;
  j["eigenvalues"] = window.eigenvalues;
  j["multiplicities"] = window.multiplicities;
  return j;
}

Json report_json(const ContourReport& report, const std::string& scenario_name) {
  Json j;
  j["schema"] = "caldet-report/1";
  j["scenario"] = scenario_name;
  j["kind"] = "contour";
  Json svals = Json::array(), zvals = Json::array();
  for (size_t i = 0; i < report.s_values.size(); ++i) {
    svals.push_back(json_complex(report.s_values[i]));
    zvals.push_back(json_complex(report.zeta_values[i]));
  }
  j["s_values"] = svals;
  j["zeta_values"] = zvals;
  j["zeta_prime_at_zero"] = json_complex(report.zeta_prime_at_zero);
  j["det_ratio"] = json_complex(report.det_ratio);
  j["used_radius"] = report.used_radius;
  j["tail_estimate"] = report.tail_estimate;
  return j;
}

std::string curve_csv(const LogCurve& curve) {
  std::string out = "radius,re_log,im_log\n";
  for (const auto& s : curve.samples) {
    out += format_double(std::abs(s.lambda));
    out += ',';
    out += format_double(s.g.real());
    out += ',';
    out += format_double(s.g.imag());
    out += '\n';
  }
  return out;
}

std::string spectrum_csv(const SpectrumWindow& window) {
  std::string out = "index,eigenvalue,multiplicity\n";
  for (size_t i = 0; i < window.eigenvalues.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(window.eigenvalues[i]);
    out += ',';
    out += std::to_string(window.multiplicities[i]);
    out += '\n';
  }
  return out;
}

std::string grid_csv(const CurvatureReport& report) {
  std::string out =
      "x,y,log_canonical_P1,log_canonical_P2,log_quillen_P1,log_quillen_P2,"
      "curv_diff_zeta,curv_diff_canonical\n";
  const int n = report.n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int idx = i * n + j;
      out += format_double(report.x[idx]);
      out += ',';
      out += format_double(report.y[idx]);
      out += ',';
      out += format_double(report.log_canonical_p1[idx]);
      out += ',';
      out += format_double(report.log_canonical_p2[idx]);
      out += ',';
      out += format_double(report.log_quillen_p1[idx]);
      out += ',';
      out += format_double(report.log_quillen_p2[idx]);
      out += ',';
      const bool interior = i > 0 && i + 1 < n && j > 0 && j + 1 < n;
      if (interior) {
        const int k = (i - 1) * (n - 2) + (j - 1);
        out += format_double(report.diff_zeta[k]);
        out += ',';
        out += format_double(report.diff_canonical[k]);
      } else {
        out += ',';
      }
      out += '\n';
    }
  }
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open output file " + path);
  f << contents;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace caldet
