#pragma once

#include <vector>

#include "mmot/cost.hpp"
#include "mmot/measures.hpp"
#include "mmot/mmot.hpp"

namespace mmot {

// Indices of the points retained by the Choquet-boundary test: p is extreme
// iff no convex combination of the other points reproduces it. Inputs of size
// <= 2 are returned whole.
std::vector<std::size_t> extreme_points_of(const std::vector<GridPoint>& points,
                                           double tol = 1e-9);

struct ExtremalityRecord {
  int x_index = 0;
  double mass = 0.0;
  int support_size = 0;                // after the noise floor
  std::vector<int> non_extreme;        // y indices
  double extreme_fraction = 0.0;       // conditional mass share on extreme atoms
};

struct ExtremalityReport {
  std::vector<ExtremalityRecord> records;
  double worst_fraction = 1.0;
  double violating_mass = 0.0;             // pi1-weighted non-extreme mass
  double extreme_fraction_of_mass = 1.0;   // pi1-weighted average fraction
};

// Compares each conditional's support against the extreme points of its own
// convex hull; conditional atoms below tol are ignored as discretization
// noise.
ExtremalityReport check_conditional_extremality(const JointPlan& plan, double tol);

struct StayingReport {
  double diagonal_mass = 0.0;  // mass of pi1 ^ pi2
  bool dominance_ok = false;   // pi >= D#(pi1 ^ pi2) entrywise within 1e-10
  JointPlan residual;          // pi - D#(pi1 ^ pi2), kept unnormalized
};

StayingReport staying_decomposition(const JointPlan& plan);

// Injectivity probe for the cost gradient block (dc/dy_i)_{i in S}: evaluated
// by central finite differences at every grid assignment of the complement
// coordinates, holding x and y_S fixed. True iff all gradient vectors are
// pairwise distinct beyond tol. Throws "kink encountered" at
// non-differentiable probe points.
bool twist_check(const CostSpec& cost, const std::vector<int>& S, const GridPoint& x,
                 const std::vector<double>& yS, const std::vector<DiscreteMeasure>& nus,
                 double tol);

struct GraphViolation {
  int x_index = 0;
  std::vector<double> yS;
  double mass = 0.0;    // conditional mass that is off the graph in this group
  double spread = 0.0;  // max complement-coordinate difference within the group
};

struct GraphReport {
  bool pass = true;
  std::vector<GraphViolation> violations;
};

// Groups each conditional's support by the S coordinates and flags groups
// whose complement coordinates differ by more than tol; passes iff no
// violation carries conditional mass above tol.
GraphReport check_graph_structure(const JointPlan& plan, const std::vector<int>& S, double tol);

struct ThreePointRow {
  double x = 0.0;
  double t_minus = 0.0, t_plus = 0.0;
  double lambda_minus = 0.0, lambda_plus = 0.0;
  double stay = 0.0;
};

struct ThreePointStructure {
  std::vector<ThreePointRow> rows;
  double max_weight_residual = 0.0;      // |stay + lambda- + lambda+ - 1|
  double max_barycenter_residual = 0.0;  // conditional barycenter vs x
  double max_lambda_residual = 0.0;      // against the two-point split formula
};

// Extracts (T-, T+, lambda-, lambda+, stay) per x for one-dimensional plans
// whose conditionals live on at most three atoms including possibly x itself.
// Throws "not three-point" otherwise.
ThreePointStructure three_point_structure_1d(const JointPlan& plan, double noise_floor = 1e-9);

}  // namespace mmot
