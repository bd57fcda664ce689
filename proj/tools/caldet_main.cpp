#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "caldet/scenario.hpp"

namespace {

struct GlobalArgs {
  std::string scenario_path;
  std::string out_dir;
  int steps = 0;
  std::vector<double> radii;
  int fit_terms = 0;
  double tol = -1.0;
  int count = 0;
  int threads = 0;
  bool with_contour = false;
};

void add_common(CLI::App* cmd, GlobalArgs& args) {
  cmd->add_option("--scenario", args.scenario_path, "scenario JSON file")->required();
  cmd->add_option("--out", args.out_dir, "output directory for report files");
  cmd->add_option("--steps", args.steps, "integrator steps override");
  cmd->add_option("--radii", args.radii, "ray radii override: min max count")->expected(3);
  cmd->add_option("--fit-terms", args.fit_terms, "exponent count override for the LIM fit");
  cmd->add_option("--tol", args.tol, "tolerance override for verify commands");
  cmd->add_option("--threads", args.threads, "worker thread cap (also CALDET_THREADS)");
}

int run(const std::string& command, const GlobalArgs& args) {
  if (args.threads > 0) {
    setenv("CALDET_THREADS", std::to_string(args.threads).c_str(), 1);
  }
  caldet::Scenario scenario = caldet::load_scenario_file(args.scenario_path);
  caldet::CommandOverrides overrides;
  if (args.steps > 0) overrides.steps = args.steps;
  if (!args.radii.empty()) {
    overrides.radii = std::make_tuple(args.radii[0], args.radii[1],
                                      static_cast<int>(args.radii[2]));
  }
  if (args.fit_terms > 0) overrides.fit_terms = args.fit_terms;
  if (args.tol > 0) overrides.tol = args.tol;
  if (args.count > 0) overrides.count = args.count;
  overrides.with_contour = args.with_contour;

  const caldet::CommandResult result = caldet::run_command(command, scenario, overrides);
  std::cout << result.summary << "\n";
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    const std::string stem = args.out_dir + "/" + scenario.name + "_" + command;
    caldet::write_file(stem + ".json", caldet::dump_json(result.report));
    for (const auto& [suffix, contents] : result.files) {
      caldet::write_file(stem + "_" + suffix, contents);
    }
  } else {
    std::cout << caldet::dump_json(result.report);
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"caldet: canonical and relative zeta determinants of 1-D elliptic boundary value problems"};
  app.require_subcommand(1);

  GlobalArgs args;
  const std::vector<std::string> commands = {"describe",          "spectrum",   "canonical-det",
                                             "relative-det",      "verify-parametrix",
                                             "verify-thm1",       "metrics",    "curvature"};
  for (const auto& name : commands) {
    CLI::App* cmd = app.add_subcommand(name);
    add_common(cmd, args);
    if (name == "spectrum") cmd->add_option("--count", args.count, "eigenvalue count");
    if (name == "relative-det") {
      cmd->add_flag("--contour", args.with_contour, "add the contour cross-check");
    }
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    return run(command, args);
  } catch (const caldet::InputError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const caldet::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
