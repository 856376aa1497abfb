#pragma once

#include <vector>

#include "mmot/cost.hpp"
#include "mmot/lp.hpp"
#include "mmot/measures.hpp"

namespace mmot {

// Discrete multi-marginal martingale transport problem: d coordinatewise
// convex-ordered pairs (mu_i, nu_i) and a coupling cost on the product grids
// X = prod supp(mu_i), Y = prod supp(nu_i). Grid indices are row-major with
// the last coordinate fastest.
struct MmotProblem {
  int d = 0;
  std::vector<DiscreteMeasure> mus, nus;
  CostSpec cost;
  std::vector<GridPoint> x_grid, y_grid;

  int x_size() const { return static_cast<int>(x_grid.size()); }
  int y_size() const { return static_cast<int>(y_grid.size()); }
  int n_vars() const { return x_size() * y_size(); }

  // Per-coordinate atom index of a flat grid index.
  const std::vector<int>& x_digits(int xi) const { return x_digits_[xi]; }
  const std::vector<int>& y_digits(int yi) const { return y_digits_[yi]; }

  double cost_at(int xi, int yi) const;
  double mu_weight(int i, int atom) const { return mus[i].atoms()[atom].weight; }
  double nu_weight(int i, int atom) const { return nus[i].atoms()[atom].weight; }

  std::vector<std::vector<int>> x_digits_, y_digits_;
};

// Validates coordinatewise convex order and the cost spec, then builds grids.
MmotProblem make_problem(std::vector<DiscreteMeasure> mus, std::vector<DiscreteMeasure> nus,
                         CostSpec cost, double order_tol = 1e-9);

// Dual potentials f_i, g_i on the marginal atoms plus the vector field h on
// the x grid. A certified triple satisfies
//   sum_i f_i(x_i) - sum_i g_i(y_i) + h(x).(y - x) <= c(x, y)
// on every grid pair, with equality on the support of an optimal plan.
struct DualTriple {
  std::vector<std::vector<double>> f, g;  // per coordinate, per atom
  std::vector<std::vector<double>> h;     // per x index, d components

  double f_sum(const MmotProblem& p, int xi) const;
  double g_sum(const MmotProblem& p, int yi) const;
  double pairing(const MmotProblem& p, int xi, int yi) const;  // full dual form at (x, y)
  double objective(const MmotProblem& p) const;
};

struct CertificationReport {
  double max_violation = 0.0;        // over all grid pairs
  double max_support_residual = 0.0; // over plan-support pairs
  bool pass(double tol) const { return max_violation <= tol && max_support_residual <= tol; }
};

CertificationReport certify_dual(const DualTriple& dual, const MmotProblem& problem,
                                 const JointPlan* plan = nullptr);

// Row layout of the assembled LP. One redundant row per marginal block beyond
// the first is dropped (the block's last atom); dropped rows take dual
// multiplier zero.
struct LpLayout {
  std::vector<std::vector<int>> mu_row, nu_row;  // -1 where dropped
  int mart_offset = 0;
  int n_rows = 0;
  int mart_row(const MmotProblem& p, int xi, int i) const { return mart_offset + xi * p.d + i; }
};

LpLayout lp_layout(const MmotProblem& problem);

// Variables are plan weights indexed xi * |Y| + yi; rows are the mu marginals,
// the nu marginals, then one barycenter row per (x, coordinate).
LinearProgram build_lp(const MmotProblem& problem);

struct PrimalResult {
  JointPlan plan;
  double value = 0.0;
  LpSolution lp;
};

PrimalResult solve_primal(const MmotProblem& problem);

// Reads the dual triple off the LP multipliers and certifies it; throws
// "uncertified dual" if any invariant fails at 1e-8.
DualTriple recover_dual(const MmotProblem& problem, const LpSolution& lp_solution);

// Shifts additive constants so that int f_i dmu_i = 0 and int g_i dnu_i = 0
// for every i >= 2; the shifts cancel in the pointwise form and the dual
// objective is unchanged.
DualTriple gauge_normalize(const DualTriple& dual, const MmotProblem& problem);

double dual_objective(const DualTriple& dual, const MmotProblem& problem);

// P(c) - D(c) from two independent objective evaluations of a fresh solve.
double duality_gap(const MmotProblem& problem);
double duality_gap(const MmotProblem& problem, const PrimalResult& primal,
                   const DualTriple& dual);

// Product of per-coordinate one-dimensional couplings obtained from d = 1
// feasibility solves.
JointPlan product_feasible_plan(const MmotProblem& problem);

// chi(y) = max over x in x_grid of [ sum_i f_i(x_i) + h(x).(y - x) ];
// convex as a finite max of affine functions.
double chi_from_dual(const DualTriple& dual, const MmotProblem& problem, const GridPoint& y);

// Anchor for normalization: the x grid point nearest the vector of mu means.
int chi_anchor_index(const MmotProblem& problem);

// chi with a supporting affine function at the anchor subtracted, so that
// chi(a) = 0 and 0 is a subgradient at a; nonnegative everywhere.
double chi_normalized(const DualTriple& dual, const MmotProblem& problem, const GridPoint& y);

// Feasibility residual of an arbitrary plan against the problem's LP rows.
double feasibility_residual(const MmotProblem& problem, const JointPlan& plan);

double plan_cost(const MmotProblem& problem, const JointPlan& plan);

}  // namespace mmot
