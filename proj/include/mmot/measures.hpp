#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace mmot {

// Coordinate tolerance used when matching atoms or grid points across
// containers. Grids are built from shared rationals, so matches are exact up
// to float noise.
inline constexpr double kCoordTol = 1e-12;

struct Atom {
  double position = 0.0;
  double weight = 0.0;
};

// Finite atomic measure on the real line. Atoms are sorted by position and
// carry strictly positive weights; atoms closer than kCoordTol are merged and
// zero-weight atoms are dropped at construction. Mass and first moment are
// cached.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<Atom> atoms);

  static DiscreteMeasure dirac(double position, double weight = 1.0);
  static DiscreteMeasure from_pairs(const std::vector<std::pair<double, double>>& pairs);

  bool empty() const { return atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  double mass() const { return mass_; }
  double mean() const;  // first moment / mass; throws on empty measure

  double min_position() const;
  double max_position() const;

  // u(x) = sum_j w_j |x - a_j|; piecewise linear with kinks at the atoms.
  double potential(double x) const;

  // Weight at a position, matched within kCoordTol (0 if absent).
  double weight_at(double position) const;

  // Atoms with position strictly inside (lo, hi).
  DiscreteMeasure restrict_open(double lo, double hi) const;

  DiscreteMeasure scaled(double factor) const;
  friend DiscreteMeasure operator+(const DiscreteMeasure& a, const DiscreteMeasure& b);
  friend DiscreteMeasure operator-(const DiscreteMeasure& a, const DiscreteMeasure& b);

  // Max absolute weight difference over the union of supports.
  static double max_atom_difference(const DiscreteMeasure& a, const DiscreteMeasure& b);

 private:
  std::vector<Atom> atoms_;
  double mass_ = 0.0;
  double moment_ = 0.0;
};

enum class OrderFailure { none, mass_mismatch, mean_mismatch, potential };

struct ConvexOrderWitness {
  double point = 0.0;
  double gap = 0.0;
};

struct ConvexOrderResult {
  bool ordered = false;
  OrderFailure failure = OrderFailure::none;
  std::optional<ConvexOrderWitness> witness;  // worst violating point, potential failures
};

// mu <=_c nu iff masses and means agree within tol and u_mu <= u_nu + tol at
// every atom of either measure. The atom reduction is exact: u_mu - u_nu is
// piecewise linear with kinks only at atoms and vanishes at +-infinity once
// masses and means match.
ConvexOrderResult convex_order_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     double tol = 1e-9);

using GridPoint = std::vector<double>;

bool points_equal(const GridPoint& a, const GridPoint& b, double tol = kCoordTol);
bool lex_less(const GridPoint& a, const GridPoint& b);

// Finite nonnegative measure on points of R^d, lex-sorted support with
// positive weights. Points closer than kCoordTol in every coordinate are
// merged at construction.
class PointMeasure {
 public:
  PointMeasure() = default;
  PointMeasure(std::vector<GridPoint> points, std::vector<double> weights);

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }
  const std::vector<GridPoint>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  double mass() const;
  int dim() const { return points_.empty() ? 0 : static_cast<int>(points_[0].size()); }

  double weight_at(const GridPoint& p) const;

  // One-dimensional marginal along a coordinate axis.
  DiscreteMeasure marginal(int axis) const;

 private:
  std::vector<GridPoint> points_;
  std::vector<double> weights_;
};

// Sparse nonnegative measure on the product grid X x Y. Entries are strictly
// positive; sparsity is semantic. A probability plan additionally has total
// mass 1 (check_probability); sub-probability plans appear as residuals of
// the staying decomposition.
class JointPlan {
 public:
  JointPlan() = default;
  JointPlan(int dim, std::vector<GridPoint> x_grid, std::vector<GridPoint> y_grid);

  int dim() const { return dim_; }
  const std::vector<GridPoint>& x_grid() const { return x_grid_; }
  const std::vector<GridPoint>& y_grid() const { return y_grid_; }
  const std::map<std::pair<int, int>, double>& entries() const { return entries_; }

  void add_entry(int xi, int yi, double weight);  // drops weights <= 1e-15
  double entry(int xi, int yi) const;
  double mass() const;
  std::size_t support_size() const { return entries_.size(); }

  std::vector<double> x_weights() const;  // pi1 by x index
  std::vector<double> y_weights() const;  // pi2 by y index

  // Throws unless total mass is 1 within tol.
  void check_probability(double tol = 1e-9) const;
  JointPlan normalized() const;

 private:
  int dim_ = 0;
  std::vector<GridPoint> x_grid_;
  std::vector<GridPoint> y_grid_;
  std::map<std::pair<int, int>, double> entries_;
};

// The d-copulas pi1(x) = sum_y pi(x,y), pi2(y) = sum_x pi(x,y).
std::pair<PointMeasure, PointMeasure> copulas_of(const JointPlan& plan);

struct Conditional {
  int x_index = 0;
  double mass = 0.0;                                // pi1 mass at x
  std::vector<std::pair<int, double>> weights;      // y index -> normalized weight
};

// Conditionals pi_x for every x with positive pi1 mass, normalized to mass 1.
std::vector<Conditional> disintegrate(const JointPlan& plan);

// Barycenter of a conditional; equals the grid point x for martingale plans.
GridPoint conditional_barycenter(const JointPlan& plan, const Conditional& c);

// Atomwise minimum on the shared support (atoms matched within kCoordTol).
PointMeasure measure_min(const PointMeasure& a, const PointMeasure& b);

// Mass m(x) placed at (x, x) for every atom x of m.
JointPlan diagonal_pushforward(const PointMeasure& m);

struct DensitySpec {
  enum class Kind { uniform, table };
  Kind kind = Kind::uniform;
  double lo = 0.0;
  double hi = 1.0;
  // Piecewise-constant density values on equal subintervals of [lo, hi];
  // normalized to total mass 1 for kind = table.
  std::vector<double> values;

  static DensitySpec uniform(double lo, double hi);
  static DensitySpec table(double lo, double hi, std::vector<double> values);
};

// Partitions [lo, hi] into n equal cells and emits one atom per cell at the
// cell's conditional barycenter with the cell's mass. The output mean equals
// the density mean exactly.
DiscreteMeasure discretize_density(const DensitySpec& spec, int n_cells);

}  // namespace mmot
