#include "mmot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmot {

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.position < b.position; });
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.position) || !std::isfinite(a.weight))
      throw std::invalid_argument("measure atom must be finite");
    if (a.weight < -kCoordTol) throw std::invalid_argument("negative atom weight");
    if (a.weight <= kCoordTol) continue;
    if (!atoms_.empty() && a.position - atoms_.back().position <= kCoordTol) {
      atoms_.back().weight += a.weight;
    } else {
      atoms_.push_back(a);
    }
  }
  for (const Atom& a : atoms_) {
    mass_ += a.weight;
    moment_ += a.weight * a.position;
  }
}

DiscreteMeasure DiscreteMeasure::dirac(double position, double weight) {
  return DiscreteMeasure({{position, weight}});
}

DiscreteMeasure DiscreteMeasure::from_pairs(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<Atom> atoms;
  atoms.reserve(pairs.size());
  for (auto& [p, w] : pairs) atoms.push_back({p, w});
  return DiscreteMeasure(std::move(atoms));
}

double DiscreteMeasure::mean() const {
  if (empty()) throw std::invalid_argument("empty measure");
  return moment_ / mass_;
}

double DiscreteMeasure::min_position() const {
  if (empty()) throw std::invalid_argument("empty measure");
  return atoms_.front().position;
}

double DiscreteMeasure::max_position() const {
  if (empty()) throw std::invalid_argument("empty measure");
  return atoms_.back().position;
}

double DiscreteMeasure::potential(double x) const {
  if (empty()) throw std::invalid_argument("empty measure");
  double u = 0.0;
  for (const Atom& a : atoms_) u += a.weight * std::abs(x - a.position);
  return u;
}

double DiscreteMeasure::weight_at(double position) const {
  for (const Atom& a : atoms_)
    if (std::abs(a.position - position) <= kCoordTol) return a.weight;
  return 0.0;
}

DiscreteMeasure DiscreteMeasure::restrict_open(double lo, double hi) const {
  std::vector<Atom> kept;
  for (const Atom& a : atoms_)
    if (a.position > lo + kCoordTol && a.position < hi - kCoordTol) kept.push_back(a);
  return DiscreteMeasure(std::move(kept));
}

DiscreteMeasure DiscreteMeasure::scaled(double factor) const {
  if (factor < 0) throw std::invalid_argument("negative scale");
  std::vector<Atom> scaled = atoms_;
  for (Atom& a : scaled) a.weight *= factor;
  return DiscreteMeasure(std::move(scaled));
}

DiscreteMeasure operator+(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  std::vector<Atom> atoms = a.atoms_;
  atoms.insert(atoms.end(), b.atoms_.begin(), b.atoms_.end());
  return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure operator-(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  std::vector<Atom> atoms = a.atoms_;
  for (const Atom& x : b.atoms_) atoms.push_back({x.position, -x.weight});
  // Re-run construction by merging; negative remainders beyond tolerance are
  // rejected there.
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& l, const Atom& r) { return l.position < r.position; });
  std::vector<Atom> merged;
  for (const Atom& at : atoms) {
    if (!merged.empty() && at.position - merged.back().position <= kCoordTol)
      merged.back().weight += at.weight;
    else
      merged.push_back(at);
  }
  for (Atom& at : merged) {
    if (at.weight < -1e-9) throw std::invalid_argument("measure difference is signed");
    if (at.weight < 0) at.weight = 0;
  }
  return DiscreteMeasure(std::move(merged));
}

double DiscreteMeasure::max_atom_difference(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  double worst = 0.0;
  for (const Atom& at : a.atoms_)
    worst = std::max(worst, std::abs(at.weight - b.weight_at(at.position)));
  for (const Atom& at : b.atoms_)
    worst = std::max(worst, std::abs(at.weight - a.weight_at(at.position)));
  return worst;
}

ConvexOrderResult convex_order_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     double tol) {
  if (mu.empty() || nu.empty()) throw std::invalid_argument("empty measure");
  ConvexOrderResult result;
  if (std::abs(mu.mass() - nu.mass()) > tol) {
    result.failure = OrderFailure::mass_mismatch;
    return result;
  }
  if (std::abs(mu.mean() - nu.mean()) > tol * std::max(1.0, mu.mass())) {
    result.failure = OrderFailure::mean_mismatch;
    return result;
  }
  double worst_gap = 0.0;
  double worst_point = 0.0;
  auto probe = [&](double x) {
    double gap = mu.potential(x) - nu.potential(x);
    if (gap > worst_gap) {
      worst_gap = gap;
      worst_point = x;
    }
  };
  for (const Atom& a : mu.atoms()) probe(a.position);
  for (const Atom& a : nu.atoms()) probe(a.position);
  if (worst_gap > tol) {
    result.failure = OrderFailure::potential;
    result.witness = ConvexOrderWitness{worst_point, worst_gap};
    return result;
  }
  result.ordered = true;
  return result;
}

bool points_equal(const GridPoint& a, const GridPoint& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

bool lex_less(const GridPoint& a, const GridPoint& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

PointMeasure::PointMeasure(std::vector<GridPoint> points, std::vector<double> weights) {
  if (points.size() != weights.size())
    throw std::invalid_argument("points/weights size mismatch");
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return lex_less(points[i], points[j]); });
  for (std::size_t k : order) {
    if (weights[k] < -kCoordTol) throw std::invalid_argument("negative point weight");
    if (weights[k] <= kCoordTol) continue;
    if (!points[k].empty() && !points_.empty() && points[k].size() != points_[0].size())
      throw std::invalid_argument("point dimension mismatch");
    if (!points_.empty() && points_equal(points_.back(), points[k])) {
      weights_.back() += weights[k];
    } else {
      points_.push_back(points[k]);
      weights_.push_back(weights[k]);
    }
  }
}

double PointMeasure::mass() const {
  double m = 0.0;
  for (double w : weights_) m += w;
  return m;
}

double PointMeasure::weight_at(const GridPoint& p) const {
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (points_equal(points_[i], p)) return weights_[i];
  return 0.0;
}

DiscreteMeasure PointMeasure::marginal(int axis) const {
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < points_.size(); ++i)
    atoms.push_back({points_[i].at(axis), weights_[i]});
  return DiscreteMeasure(std::move(atoms));
}

JointPlan::JointPlan(int dim, std::vector<GridPoint> x_grid, std::vector<GridPoint> y_grid)
    : dim_(dim), x_grid_(std::move(x_grid)), y_grid_(std::move(y_grid)) {
  for (const GridPoint& p : x_grid_)
    if (static_cast<int>(p.size()) != dim_) throw std::invalid_argument("x grid dimension");
  for (const GridPoint& p : y_grid_)
    if (static_cast<int>(p.size()) != dim_) throw std::invalid_argument("y grid dimension");
}

void JointPlan::add_entry(int xi, int yi, double weight) {
  if (xi < 0 || xi >= static_cast<int>(x_grid_.size()) || yi < 0 ||
      yi >= static_cast<int>(y_grid_.size()))
    throw std::out_of_range("plan entry index");
  if (weight < -1e-9) throw std::invalid_argument("negative plan weight");
  if (weight <= 1e-15) return;
  entries_[{xi, yi}] += weight;
}

double JointPlan::entry(int xi, int yi) const {
  auto it = entries_.find({xi, yi});
  return it == entries_.end() ? 0.0 : it->second;
}

double JointPlan::mass() const {
  double m = 0.0;
  for (auto& [k, w] : entries_) m += w;
  return m;
}

std::vector<double> JointPlan::x_weights() const {
  std::vector<double> w(x_grid_.size(), 0.0);
  for (auto& [k, v] : entries_) w[k.first] += v;
  return w;
}

std::vector<double> JointPlan::y_weights() const {
  std::vector<double> w(y_grid_.size(), 0.0);
  for (auto& [k, v] : entries_) w[k.second] += v;
  return w;
}

void JointPlan::check_probability(double tol) const {
  if (std::abs(mass() - 1.0) > tol) throw std::runtime_error("plan mass is not 1");
}

JointPlan JointPlan::normalized() const {
  double m = mass();
  if (m <= 0) throw std::runtime_error("cannot normalize zero plan");
  JointPlan out(dim_, x_grid_, y_grid_);
  for (auto& [k, v] : entries_) out.add_entry(k.first, k.second, v / m);
  return out;
}

std::pair<PointMeasure, PointMeasure> copulas_of(const JointPlan& plan) {
  std::vector<double> xw = plan.x_weights();
  std::vector<double> yw = plan.y_weights();
  PointMeasure pi1(plan.x_grid(), xw);
  PointMeasure pi2(plan.y_grid(), yw);
  return {pi1, pi2};
}

GridPoint conditional_barycenter(const JointPlan& plan, const Conditional& c) {
  GridPoint b(plan.dim(), 0.0);
  for (auto& [yi, w] : c.weights) {
    const GridPoint& y = plan.y_grid()[yi];
    for (int k = 0; k < plan.dim(); ++k) b[k] += w * y[k];
  }
  return b;
}

std::vector<Conditional> disintegrate(const JointPlan& plan) {
  std::vector<double> xw = plan.x_weights();
  std::vector<Conditional> out;
  std::vector<std::vector<std::pair<int, double>>> per_x(plan.x_grid().size());
  for (auto& [k, v] : plan.entries()) per_x[k.first].push_back({k.second, v});
  for (std::size_t xi = 0; xi < per_x.size(); ++xi) {
    if (xw[xi] <= 0) continue;
    Conditional c;
    c.x_index = static_cast<int>(xi);
    c.mass = xw[xi];
    for (auto& [yi, v] : per_x[xi]) c.weights.push_back({yi, v / xw[xi]});
    out.push_back(std::move(c));
  }
  return out;
}

PointMeasure measure_min(const PointMeasure& a, const PointMeasure& b) {
  std::vector<GridPoint> points;
  std::vector<double> weights;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (points_equal(a.points()[i], b.points()[j])) {
      points.push_back(a.points()[i]);
      weights.push_back(std::min(a.weights()[i], b.weights()[j]));
      ++i;
      ++j;
    } else if (lex_less(a.points()[i], b.points()[j])) {
      ++i;
    } else {
      ++j;
    }
  }
  return PointMeasure(std::move(points), std::move(weights));
}

JointPlan diagonal_pushforward(const PointMeasure& m) {
  JointPlan plan(m.dim(), m.points(), m.points());
  for (std::size_t i = 0; i < m.size(); ++i)
    plan.add_entry(static_cast<int>(i), static_cast<int>(i), m.weights()[i]);
  return plan;
}

DensitySpec DensitySpec::uniform(double lo, double hi) {
  DensitySpec s;
  s.kind = Kind::uniform;
  s.lo = lo;
  s.hi = hi;
  return s;
}

DensitySpec DensitySpec::table(double lo, double hi, std::vector<double> values) {
  DensitySpec s;
  s.kind = Kind::table;
  s.lo = lo;
  s.hi = hi;
  s.values = std::move(values);
  return s;
}

DiscreteMeasure discretize_density(const DensitySpec& spec, int n_cells) {
  if (n_cells < 1) throw std::invalid_argument("n_cells must be >= 1");
  if (!(spec.lo < spec.hi)) throw std::invalid_argument("invalid interval");

  std::vector<double> density;  // piecewise-constant values on equal source cells
  if (spec.kind == DensitySpec::Kind::uniform) {
    density = {1.0 / (spec.hi - spec.lo)};
  } else {
    if (spec.values.empty()) throw std::invalid_argument("empty density table");
    double total = 0.0;
    double cell = (spec.hi - spec.lo) / static_cast<double>(spec.values.size());
    for (double v : spec.values) {
      if (v < 0) throw std::invalid_argument("negative density");
      total += v * cell;
    }
    if (total <= 0) throw std::invalid_argument("zero density");
    for (double v : spec.values) density.push_back(v / total);
  }

  std::size_t n_src = density.size();
  double src_w = (spec.hi - spec.lo) / static_cast<double>(n_src);
  std::vector<Atom> atoms;
  for (int k = 0; k < n_cells; ++k) {
    double a = spec.lo + (spec.hi - spec.lo) * k / n_cells;
    double b = spec.lo + (spec.hi - spec.lo) * (k + 1) / n_cells;
    double cell_mass = 0.0, cell_moment = 0.0;
    for (std::size_t s = 0; s < n_src; ++s) {
      double sl = spec.lo + src_w * s;
      double sr = sl + src_w;
      double lo = std::max(a, sl), hi = std::min(b, sr);
      if (hi <= lo) continue;
      cell_mass += density[s] * (hi - lo);
      cell_moment += density[s] * (hi - lo) * 0.5 * (hi + lo);
    }
    if (cell_mass > 0) atoms.push_back({cell_moment / cell_mass, cell_mass});
  }
  return DiscreteMeasure(std::move(atoms));
}

}  // namespace mmot
