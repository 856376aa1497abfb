#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmot {

// Equality-constrained linear program in standard form:
//   minimize c.x  subject to  A x = b,  x >= 0.
// Rows are sparse, the objective is dense.
struct SparseRow {
  std::vector<int> idx;
  std::vector<double> val;
  double rhs = 0.0;
};

struct LinearProgram {
  int n_vars = 0;
  std::vector<double> objective;  // size n_vars
  std::vector<SparseRow> rows;

  void add_row(SparseRow row) { rows.push_back(std::move(row)); }
  void validate() const;  // indices in range, finite coefficients
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> primal;      // size n_vars
  std::vector<double> dual;        // one multiplier per row
  double objective_value = 0.0;
  int iterations = 0;
  std::vector<int> basis;          // basic column per row; >= n_vars marks an artificial
  bool degenerate_vertex = false;  // some basic variable is (numerically) zero
};

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Two-phase revised simplex. Dantzig pricing with Bland's rule engaged as the
// anti-cycling fallback after a run of degenerate pivots; deterministic for
// fixed input. Rank-deficient equality systems are handled by the phase-one
// artificials, which stay basic at level zero on redundant rows.
// Throws SolverError("iteration limit ...") after 50 * (n_vars + n_rows)
// pivots.
LpSolution solve_lp(const LinearProgram& lp);

struct KktReport {
  double max_primal_residual = 0.0;
  double max_dual_violation = 0.0;  // most negative reduced cost, as a positive number
  double max_cs_gap = 0.0;          // max |x_j * reduced_cost_j|
  bool pass(double tol) const {
    return max_primal_residual <= tol && max_dual_violation <= tol && max_cs_gap <= tol;
  }
};

// Residuals recomputed directly from lp and sol, independent of solver state.
KktReport check_kkt(const LinearProgram& lp, const LpSolution& sol, double tol);

// Plain-text row-oriented dump (one row per line) for cross-checking against
// external solvers. Grammar:
//   lp <n_vars> <n_rows>
//   obj <c_0> ... <c_{n-1}>
//   row <rhs> <nnz> <col>:<coef> ...
void dump_lp(const LinearProgram& lp, std::ostream& os);
LinearProgram parse_lp_dump(std::istream& is);

// -------- small barycentric programs (shared by transforms/geometry) --------

// minimize sum_j lambda_j v_j  s.t.  sum lambda_j = 1, sum lambda_j p_j = q,
// lambda >= 0. Infeasible iff q lies outside conv(points).
struct BarycentricResult {
  bool feasible = false;
  double value = 0.0;
  std::vector<double> lambda;    // per input point
  double support_constant = 0.0; // dual of the mass row: affine support value at q
  std::vector<double> gradient;  // duals of the coordinate rows: support slope
  bool degenerate = false;       // optimal vertex degenerate => duals may be non-unique
};

BarycentricResult barycentric_min(const std::vector<std::vector<double>>& points,
                                  const std::vector<double>& values,
                                  const std::vector<double>& query);

// Feasibility-only variant (zero objective).
bool barycentric_feasible(const std::vector<std::vector<double>>& points,
                          const std::vector<double>& query, double tol = 1e-9);

}  // namespace mmot
