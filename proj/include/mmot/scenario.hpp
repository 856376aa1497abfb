#pragma once

#include <map>
#include <optional>
#include <string>

#include "mmot/io.hpp"
#include "mmot/measures.hpp"
#include "mmot/mmot.hpp"

namespace mmot {

// Exit codes shared by the CLI: 0 all assertions pass, 1 a stage assertion
// failed (named in `failure`), 2 parse or validation error.
struct RunOutcome {
  int exit_code = 2;
  bool pass = false;
  std::string failure;
  std::string report_path;
};

// Scenario file: {name, problem: (inline | {"file": path}), pipeline: [...],
// tolerances: {...}}. Pipeline stages: solve, dual, normalize, transforms,
// copula_check, extremality, staying, graph(S...), three_point, chi_probe.
// Stage dependencies are validated before anything runs.
RunOutcome run_scenario_file(const std::string& path, const std::string& out_dir,
                             const std::map<std::string, double>& tol_overrides = {},
                             bool dump_lp_file = false);

// Runs every *.json scenario under dir concurrently, one solver instance
// each. Exit code is the worst over the batch.
RunOutcome run_batch(const std::string& dir, const std::string& out_dir,
                     const std::map<std::string, double>& tol_overrides = {});

// Bundled example instances: ex2_4, ex2_5, ex2_7, ex2_8.
RunOutcome run_reproduce(const std::string& example, int n, const std::string& out_dir);

// Solve a problem file and emit the result report {value, gap, plan, dual}.
RunOutcome run_solve(const std::string& problem_path, const std::string& out_dir,
                     const std::map<std::string, double>& tol_overrides = {},
                     bool dump_lp_file = false);

// Canonical decomposition of a pair of measure files.
RunOutcome run_decompose(const std::string& mu_path, const std::string& nu_path,
                         const std::string& out_dir);

// ---- bundled instances (shared with the test suites) ----

DiscreteMeasure aligned_mu(int n);  // uniform(-1/2, 1/2) discretized at n cells
DiscreteMeasure aligned_nu(int n);  // uniform(-1, 1) discretized at 2n cells

MmotProblem instance_ex2_4();
MmotProblem instance_ex2_5(int n);     // d = 2 with the coordinate cost |x_1 - y_1|
MmotProblem instance_ex2_5_1d(int n);  // the 1D problem it projects to
MmotProblem instance_ex2_7(int n);
MmotProblem instance_ex2_8(int n);

// The two-sided bound argument for ex2_5: a d = 2 plan assembled from the 1D
// optimum (moving parts placed one coordinate at a time over the product
// copula). Requires every 1D conditional to stay with weight 1/2.
JointPlan assemble_ex2_5_plan(const MmotProblem& p2, const MmotProblem& p1,
                              const JointPlan& plan1);

// Deterministic feasible plans for ex2_7 built from a closed-form coupling on
// the first coordinate and a supplied 1D coupling on the second.
JointPlan assemble_ex2_7_plan(const MmotProblem& p2, const JointPlan& second_coupling);

}  // namespace mmot
