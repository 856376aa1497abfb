#pragma once

#include <vector>

#include "mmot/mmot.hpp"

namespace mmot {

// Tabulated transform pipeline: the pair (alpha, gamma) extracted from
// g-plus-cost, its inverse transform beta, and the coordinate decompositions
// phi_i, psi_i.
struct TransformBundle {
  std::vector<double> alpha;                  // per x index
  std::vector<std::vector<double>> gamma;     // per x index, d components
  std::vector<double> beta;                   // per y index
  std::vector<std::vector<double>> phi, psi;  // per coordinate, per atom
  std::vector<char> gamma_unique;             // 0 where the optimal vertex was degenerate
};

// For each x solve: maximize a over (a, b) with a + b.(y - x) <= sum g_i(y_i)
// + c(x, y) for all y on the grid; solved through the equivalent barycentric
// program over the y grid. Throws "degenerate support" when some x cannot be
// represented as a barycenter of grid points.
void martingale_legendre(const std::vector<std::vector<double>>& g, const MmotProblem& problem,
                         std::vector<double>& alpha, std::vector<std::vector<double>>& gamma,
                         std::vector<char>* gamma_unique = nullptr);

// beta(y) = max over x of [ alpha(x) + gamma(x).(y - x) - c(x, y) ].
std::vector<double> inverse_martingale_legendre(const std::vector<double>& alpha,
                                                const std::vector<std::vector<double>>& gamma,
                                                const MmotProblem& problem);

// Successive exact minimization over grid slices:
//   phi_j(t) = min over x with x_j = t of [ alpha(x) - sum_{i<j} phi_i - sum_{i>j} f_i ].
std::vector<std::vector<double>> coordinate_legendre_phi(const std::vector<double>& alpha,
                                                         const std::vector<std::vector<double>>& f,
                                                         const MmotProblem& problem);

// Supremum analogue seeded by g:
//   psi_j(t) = max over y with y_j = t of [ beta(y) - sum_{i<j} psi_i - sum_{i>j} g_i ].
std::vector<std::vector<double>> coordinate_legendre_psi(const std::vector<double>& beta,
                                                         const std::vector<std::vector<double>>& g,
                                                         const MmotProblem& problem);

// Lower convex envelope of grid values at a query point, as the barycentric
// minimization LP. Throws "outside hull" when the query is not a convex
// combination of the grid.
double lower_convex_envelope(const std::vector<GridPoint>& grid,
                             const std::vector<double>& values, const GridPoint& query);

// One-dimensional sorted-hull evaluation; must agree with the LP route.
double lower_convex_envelope_1d(const std::vector<double>& positions,
                                const std::vector<double>& values, double query);

// H(x, .) = lower convex envelope of c(x, .) + sum g_i over the y grid.
double envelope_h(const MmotProblem& problem, const std::vector<std::vector<double>>& g, int xi,
                  const GridPoint& query);

TransformBundle build_transform_bundle(const MmotProblem& problem, const DualTriple& dual);

// Four residuals: (i) sum f_i <= alpha on the grid, (ii) equality on supp pi1,
// (iii) sum g_i >= beta on the grid, (iv) equality on supp pi2.
struct CopulaOptimalityReport {
  double grid_f_violation = 0.0;      // max (sum f - alpha) over x
  double support_f_residual = 0.0;    // max |sum f - alpha| over supp pi1
  double grid_g_violation = 0.0;      // max (beta - sum g) over y
  double support_g_residual = 0.0;    // max |sum g - beta| over supp pi2
  bool pass(double tol) const {
    return grid_f_violation <= tol && support_f_residual <= tol && grid_g_violation <= tol &&
           support_g_residual <= tol;
  }
};

CopulaOptimalityReport verify_copula_optimality(const DualTriple& dual, const JointPlan& plan,
                                                const TransformBundle& bundle,
                                                const MmotProblem& problem);

}  // namespace mmot
