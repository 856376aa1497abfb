#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "mmot/scenario.hpp"

namespace {

int report_outcome(const mmot::RunOutcome& outcome) {
  if (outcome.exit_code == 0) {
    std::cout << "ok";
    if (!outcome.report_path.empty()) std::cout << " -> " << outcome.report_path;
    std::cout << "\n";
  } else {
    std::cerr << (outcome.exit_code == 2 ? "error: " : "failed: ") << outcome.failure << "\n";
    if (!outcome.report_path.empty()) std::cerr << "report: " << outcome.report_path << "\n";
  }
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete multi-martingale transport laboratory"};
  app.require_subcommand(1);

  std::string out_dir = "out";
  double tol = 0.0;
  bool dump = false;
  app.add_option("--out", out_dir, "Output directory for reports and tables");
  app.add_option("--tol", tol, "Override the certification/gap tolerance");
  app.add_flag("--dump-lp", dump, "Also write the assembled LP in the row-text format");

  std::string solve_file;
  CLI::App* solve = app.add_subcommand("solve", "Solve a problem file and certify the dual");
  solve->add_option("file", solve_file, "Problem JSON")->required();

  std::string example;
  int n = 12;
  CLI::App* reproduce = app.add_subcommand("reproduce", "Run a bundled example instance");
  reproduce->add_option("example", example, "One of ex2_4, ex2_5, ex2_7, ex2_8")->required();
  reproduce->add_option("--n", n, "Marginal grid size");

  std::string batch_dir;
  CLI::App* batch = app.add_subcommand("batch", "Run every scenario file in a directory");
  batch->add_option("dir", batch_dir, "Directory of scenario JSON files")->required();

  std::string mu_file, nu_file;
  CLI::App* decompose =
      app.add_subcommand("decompose", "Canonical decomposition of a convex-ordered pair");
  decompose->add_option("mu", mu_file, "mu measure JSON")->required();
  decompose->add_option("nu", nu_file, "nu measure JSON")->required();

  std::string scenario_file;
  CLI::App* scenario = app.add_subcommand("scenario", "Run a single scenario file");
  scenario->add_option("file", scenario_file, "Scenario JSON")->required();

  CLI11_PARSE(app, argc, argv);

  std::map<std::string, double> overrides;
  if (tol > 0.0) {
    overrides["certify"] = tol;
    overrides["gap"] = tol;
    overrides["copula"] = tol;
  }

  if (*solve) return report_outcome(mmot::run_solve(solve_file, out_dir, overrides, dump));
  if (*reproduce) return report_outcome(mmot::run_reproduce(example, n, out_dir));
  if (*batch) return report_outcome(mmot::run_batch(batch_dir, out_dir, overrides));
  if (*decompose) return report_outcome(mmot::run_decompose(mu_file, nu_file, out_dir));
  if (*scenario)
    return report_outcome(mmot::run_scenario_file(scenario_file, out_dir, overrides, dump));
  return 2;
}
