#pragma once

#include <map>
#include <optional>
#include <string>

#include "caldet/emit.hpp"
#include "caldet/quillen.hpp"
#include "caldet/reldet.hpp"

namespace caldet {

struct OracleSettings {
  int head_count = 200;
  std::optional<std::pair<double, double>> window;
  std::vector<double> s_grid;
  int period = 0;
};

struct FamilySpec {
  Complex center{0.0, 0.0};
  double h = 0.02;
  int n = 5;
};

// Parsed scenario file: operator, boundary conditions, ray/fit/oracle
// settings and flags.  Matrices are validated at parse time; unknown keys are
// rejected with a JSON-pointer anchored message.
struct Scenario {
  std::string name;
  ComposedOperator op;
  BoundaryProjection p1, p2;
  RayConfig ray;
  AsymptoticModel model;
  OracleSettings oracle;
  bool self_adjoint = false;
  bool equal_zeta_zero = false;
  TransportOptions transport;
  std::optional<FamilySpec> family;
  ContourOptions contour;
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);

// First-order factor family D_b with the coefficient shifted by b (the
// holomorphic families of the curvature computations).
DiracFactor shifted_factor(const DiracFactor& base, Complex b);

// Oracle comparison for a relative-determinant report: the quotient of
// zeta-determinants, through the Dirac-Laplacian route for first-order
// operators and directly for even order.
void attach_oracle_ratio(DeterminantReport& report, const Scenario& scenario);

struct CommandOverrides {
  std::optional<int> steps;
  std::optional<std::tuple<double, double, int>> radii;
  std::optional<int> fit_terms;
  std::optional<double> tol;
  std::optional<int> count;
  bool with_contour = false;
};

struct CommandResult {
  int exit_code = 0;
  Json report;
  std::map<std::string, std::string> files;  // filename suffix -> contents
  std::string summary;
};

// Commands: describe, spectrum, canonical-det, relative-det,
// verify-parametrix, verify-thm1, metrics, curvature.
CommandResult run_command(const std::string& command, Scenario scenario,
                          const CommandOverrides& overrides = {});

}  // namespace caldet
