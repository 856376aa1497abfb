#include "mmot/structure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmot {

namespace {

constexpr double kTouchTol = 1e-12;  // u_mu = u_nu equality threshold at atoms

struct GridNode {
  double position;
  double gap;  // u_nu - u_mu
};

std::vector<GridNode> potential_gap_grid(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<double> positions;
  for (const Atom& a : mu.atoms()) positions.push_back(a.position);
  for (const Atom& a : nu.atoms()) positions.push_back(a.position);
  std::sort(positions.begin(), positions.end());
  std::vector<GridNode> grid;
  for (double p : positions) {
    if (!grid.empty() && p - grid.back().position <= kCoordTol) continue;
    grid.push_back({p, nu.potential(p) - mu.potential(p)});
  }
  return grid;
}

}  // namespace

Decomposition irreducible_components(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  ConvexOrderResult order = convex_order_check(mu, nu, 1e-9);
  if (!order.ordered) throw std::invalid_argument("pair is not in convex order");

  std::vector<GridNode> grid = potential_gap_grid(mu, nu);
  Decomposition result;

  // Maximal runs of strictly positive potential gap. The gap vanishes outside
  // the support hull and is piecewise linear with kinks only at grid nodes,
  // so runs are delimited by nodes where it touches zero.
  std::vector<std::pair<int, int>> runs;  // [first, last] node indices with gap > tol
  int n = static_cast<int>(grid.size());
  int k = 0;
  while (k < n) {
    if (grid[k].gap <= kTouchTol) {
      ++k;
      continue;
    }
    int first = k;
    while (k < n && grid[k].gap > kTouchTol) ++k;
    runs.push_back({first, k - 1});
  }

  // nu mass still unallocated at touching nodes; endpoint allocations consume
  // it left to right.
  std::vector<double> available(grid.size(), 0.0);
  for (std::size_t t = 0; t < grid.size(); ++t)
    if (grid[t].gap <= kTouchTol) available[t] = nu.weight_at(grid[t].position);

  int index = 0;
  for (auto [first, last] : runs) {
    IrreducibleComponent comp;
    comp.index = ++index;
    comp.lo = first > 0 ? grid[first - 1].position
                        : -std::numeric_limits<double>::infinity();
    comp.hi = last + 1 < n ? grid[last + 1].position
                           : std::numeric_limits<double>::infinity();
    if (!std::isfinite(comp.lo) || !std::isfinite(comp.hi))
      throw std::runtime_error("degenerate component");  // cannot occur for atomic pairs

    comp.mu = mu.restrict_open(comp.lo, comp.hi);
    DiscreteMeasure nu_interior = nu.restrict_open(comp.lo, comp.hi);

    double dm = comp.mu.mass() - nu_interior.mass();
    double ds = 0.0;
    for (const Atom& a : comp.mu.atoms()) ds += a.weight * a.position;
    for (const Atom& a : nu_interior.atoms()) ds -= a.weight * a.position;

    double det = comp.hi - comp.lo;
    if (std::abs(det) < kTouchTol) throw std::runtime_error("degenerate component");
    double e_lo = (comp.hi * dm - ds) / det;
    double e_hi = (ds - comp.lo * dm) / det;
    if (e_lo < -1e-9 || e_hi < -1e-9) throw std::runtime_error("degenerate component");
    e_lo = std::max(e_lo, 0.0);
    e_hi = std::max(e_hi, 0.0);

    int lo_node = first - 1, hi_node = last + 1;
    if (e_lo > 0) {
      if (e_lo > available[lo_node] + 1e-9) throw std::runtime_error("degenerate component");
      e_lo = std::min(e_lo, available[lo_node]);
      available[lo_node] -= e_lo;
    }
    if (e_hi > 0) {
      if (e_hi > available[hi_node] + 1e-9) throw std::runtime_error("degenerate component");
      e_hi = std::min(e_hi, available[hi_node]);
      available[hi_node] -= e_hi;
    }

    std::vector<Atom> nu_atoms(nu_interior.atoms());
    if (e_lo > kCoordTol) nu_atoms.push_back({comp.lo, e_lo});
    if (e_hi > kCoordTol) nu_atoms.push_back({comp.hi, e_hi});
    comp.nu = DiscreteMeasure(std::move(nu_atoms));
    comp.closed_lo = e_lo > kCoordTol;
    comp.closed_hi = e_hi > kCoordTol;
    result.components.push_back(std::move(comp));
  }

  // Fixed part: mu's atoms at touching nodes. nu's fixed part is what remains
  // unallocated there; the two must agree atomwise.
  std::vector<Atom> fixed_mu_atoms, fixed_nu_atoms;
  for (std::size_t t = 0; t < grid.size(); ++t) {
    if (grid[t].gap > kTouchTol) continue;
    double wm = mu.weight_at(grid[t].position);
    if (wm > kCoordTol) fixed_mu_atoms.push_back({grid[t].position, wm});
    if (available[t] > 1e-9) fixed_nu_atoms.push_back({grid[t].position, available[t]});
  }
  result.fixed = DiscreteMeasure(std::move(fixed_mu_atoms));
  DiscreteMeasure fixed_nu(std::move(fixed_nu_atoms));
  if (DiscreteMeasure::max_atom_difference(result.fixed, fixed_nu) > 1e-9)
    throw std::runtime_error("degenerate component");
  return result;
}

bool irreducibility_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  Decomposition dec = irreducible_components(mu, nu);
  if (dec.components.size() != 1) return false;
  if (dec.fixed.mass() > 1e-12) return false;
  return std::abs(dec.components[0].mu.mass() - mu.mass()) <= 1e-9;
}

}  // namespace mmot
