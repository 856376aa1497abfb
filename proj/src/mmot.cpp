#include "mmot/mmot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mmot {

namespace {

std::vector<GridPoint> product_grid(const std::vector<DiscreteMeasure>& marginals,
                                    std::vector<std::vector<int>>& digits) {
  int d = static_cast<int>(marginals.size());
  std::vector<int> sizes(d);
  long long total = 1;
  for (int i = 0; i < d; ++i) {
    sizes[i] = static_cast<int>(marginals[i].size());
    total *= sizes[i];
  }
  if (total > 2'000'000) throw std::invalid_argument("grid too large");
  std::vector<GridPoint> grid;
  grid.reserve(total);
  digits.clear();
  digits.reserve(total);
  std::vector<int> digit(d, 0);
  for (long long flat = 0; flat < total; ++flat) {
    GridPoint p(d);
    for (int i = 0; i < d; ++i) p[i] = marginals[i].atoms()[digit[i]].position;
    grid.push_back(std::move(p));
    digits.push_back(digit);
    for (int i = d - 1; i >= 0; --i) {
      if (++digit[i] < sizes[i]) break;
      digit[i] = 0;
    }
  }
  return grid;
}

}  // namespace

double MmotProblem::cost_at(int xi, int yi) const {
  if (cost.is_table()) return cost.table[static_cast<std::size_t>(xi) * y_size() + yi];
  return cost.eval(x_grid[xi], y_grid[yi]);
}

MmotProblem make_problem(std::vector<DiscreteMeasure> mus, std::vector<DiscreteMeasure> nus,
                         CostSpec cost, double order_tol) {
  if (mus.empty() || mus.size() != nus.size())
    throw std::invalid_argument("need d matching marginal pairs");
  MmotProblem p;
  p.d = static_cast<int>(mus.size());
  cost.validate(p.d);
  for (int i = 0; i < p.d; ++i) {
    ConvexOrderResult order = convex_order_check(mus[i], nus[i], order_tol);
    if (!order.ordered) {
      std::ostringstream os;
      os << "marginal pair " << i << " is not in convex order";
      if (order.witness)
        os << " (potential gap " << order.witness->gap << " at " << order.witness->point << ")";
      throw std::invalid_argument(os.str());
    }
  }
  p.mus = std::move(mus);
  p.nus = std::move(nus);
  p.cost = std::move(cost);
  p.x_grid = product_grid(p.mus, p.x_digits_);
  p.y_grid = product_grid(p.nus, p.y_digits_);
  if (p.cost.is_table() &&
      p.cost.table.size() != static_cast<std::size_t>(p.x_size()) * p.y_size())
    throw std::invalid_argument("cost table does not match grid sizes");
  return p;
}

double DualTriple::f_sum(const MmotProblem& p, int xi) const {
  double s = 0.0;
  const std::vector<int>& dig = p.x_digits(xi);
  for (int i = 0; i < p.d; ++i) s += f[i][dig[i]];
  return s;
}

double DualTriple::g_sum(const MmotProblem& p, int yi) const {
  double s = 0.0;
  const std::vector<int>& dig = p.y_digits(yi);
  for (int i = 0; i < p.d; ++i) s += g[i][dig[i]];
  return s;
}

double DualTriple::pairing(const MmotProblem& p, int xi, int yi) const {
  double s = f_sum(p, xi) - g_sum(p, yi);
  const GridPoint& x = p.x_grid[xi];
  const GridPoint& y = p.y_grid[yi];
  for (int i = 0; i < p.d; ++i) s += h[xi][i] * (y[i] - x[i]);
  return s;
}

double DualTriple::objective(const MmotProblem& p) const { return dual_objective(*this, p); }

double dual_objective(const DualTriple& dual, const MmotProblem& p) {
  double v = 0.0;
  for (int i = 0; i < p.d; ++i) {
    for (std::size_t a = 0; a < p.mus[i].size(); ++a)
      v += dual.f[i][a] * p.mus[i].atoms()[a].weight;
    for (std::size_t b = 0; b < p.nus[i].size(); ++b)
      v -= dual.g[i][b] * p.nus[i].atoms()[b].weight;
  }
  return v;
}

CertificationReport certify_dual(const DualTriple& dual, const MmotProblem& problem,
                                 const JointPlan* plan) {
  CertificationReport report;
  int ny = problem.y_size();
  std::vector<double> gsum(ny);
  for (int yi = 0; yi < ny; ++yi) gsum[yi] = dual.g_sum(problem, yi);
  for (int xi = 0; xi < problem.x_size(); ++xi) {
    double fs = dual.f_sum(problem, xi);
    const GridPoint& x = problem.x_grid[xi];
    const std::vector<double>& hx = dual.h[xi];
    for (int yi = 0; yi < ny; ++yi) {
      double lhs = fs - gsum[yi];
      const GridPoint& y = problem.y_grid[yi];
      for (int i = 0; i < problem.d; ++i) lhs += hx[i] * (y[i] - x[i]);
      double viol = lhs - problem.cost_at(xi, yi);
      if (viol > report.max_violation) report.max_violation = viol;
    }
  }
  if (plan) {
    for (auto& [k, w] : plan->entries()) {
      (void)w;
      double r = std::abs(dual.pairing(problem, k.first, k.second) -
                          problem.cost_at(k.first, k.second));
      if (r > report.max_support_residual) report.max_support_residual = r;
    }
  }
  return report;
}

LpLayout lp_layout(const MmotProblem& p) {
  LpLayout layout;
  layout.mu_row.resize(p.d);
  layout.nu_row.resize(p.d);
  int row = 0;
  int block = 0;
  for (int i = 0; i < p.d; ++i, ++block) {
    int n = static_cast<int>(p.mus[i].size());
    layout.mu_row[i].assign(n, -1);
    for (int a = 0; a < n; ++a) {
      if (block > 0 && a == n - 1) continue;  // dropped redundant row
      layout.mu_row[i][a] = row++;
    }
  }
  for (int i = 0; i < p.d; ++i, ++block) {
    int n = static_cast<int>(p.nus[i].size());
    layout.nu_row[i].assign(n, -1);
    for (int b = 0; b < n; ++b) {
      if (b == n - 1) continue;
      layout.nu_row[i][b] = row++;
    }
  }
  layout.mart_offset = row;
  layout.n_rows = row + p.x_size() * p.d;
  return layout;
}

LinearProgram build_lp(const MmotProblem& p) {
  LpLayout layout = lp_layout(p);
  int nx = p.x_size(), ny = p.y_size();
  LinearProgram lp;
  lp.n_vars = nx * ny;
  lp.objective.resize(lp.n_vars);
  for (int xi = 0; xi < nx; ++xi)
    for (int yi = 0; yi < ny; ++yi) lp.objective[xi * ny + yi] = p.cost_at(xi, yi);

  lp.rows.resize(layout.n_rows);
  for (int i = 0; i < p.d; ++i) {
    for (std::size_t a = 0; a < p.mus[i].size(); ++a) {
      int r = layout.mu_row[i][a];
      if (r >= 0) lp.rows[r].rhs = p.mus[i].atoms()[a].weight;
    }
    for (std::size_t b = 0; b < p.nus[i].size(); ++b) {
      int r = layout.nu_row[i][b];
      if (r >= 0) lp.rows[r].rhs = p.nus[i].atoms()[b].weight;
    }
  }
  for (int xi = 0; xi < nx; ++xi) {
    const std::vector<int>& xd = p.x_digits(xi);
    const GridPoint& x = p.x_grid[xi];
    for (int yi = 0; yi < ny; ++yi) {
      int v = xi * ny + yi;
      const std::vector<int>& yd = p.y_digits(yi);
      const GridPoint& y = p.y_grid[yi];
      for (int i = 0; i < p.d; ++i) {
        int rmu = layout.mu_row[i][xd[i]];
        if (rmu >= 0) {
          lp.rows[rmu].idx.push_back(v);
          lp.rows[rmu].val.push_back(1.0);
        }
        int rnu = layout.nu_row[i][yd[i]];
        if (rnu >= 0) {
          lp.rows[rnu].idx.push_back(v);
          lp.rows[rnu].val.push_back(1.0);
        }
        double coef = y[i] - x[i];
        if (coef != 0.0) {
          int rm = layout.mart_row(p, xi, i);
          lp.rows[rm].idx.push_back(v);
          lp.rows[rm].val.push_back(coef);
        }
      }
    }
  }
  return lp;
}

PrimalResult solve_primal(const MmotProblem& problem) {
  LinearProgram lp = build_lp(problem);
  LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::infeasible) {
    double farkas = 0.0;
    for (std::size_t r = 0; r < lp.rows.size(); ++r) farkas += sol.dual[r] * lp.rows[r].rhs;
    std::ostringstream os;
    os << "infeasible problem (certificate value " << farkas << ")";
    throw std::runtime_error(os.str());
  }
  if (sol.status == LpStatus::unbounded) throw std::runtime_error("unbounded problem");
  PrimalResult result;
  result.plan = JointPlan(problem.d, problem.x_grid, problem.y_grid);
  int ny = problem.y_size();
  for (int v = 0; v < lp.n_vars; ++v)
    if (sol.primal[v] > 1e-12) result.plan.add_entry(v / ny, v % ny, sol.primal[v]);
  result.plan.check_probability(1e-9);
  result.value = sol.objective_value;
  result.lp = std::move(sol);
  return result;
}

DualTriple recover_dual(const MmotProblem& problem, const LpSolution& lp_solution) {
  if (lp_solution.status != LpStatus::optimal)
    throw std::invalid_argument("recover_dual needs an optimal solution");
  LpLayout layout = lp_layout(problem);
  if (static_cast<int>(lp_solution.dual.size()) != layout.n_rows)
    throw std::invalid_argument("solution does not match problem layout");
  DualTriple dual;
  dual.f.resize(problem.d);
  dual.g.resize(problem.d);
  for (int i = 0; i < problem.d; ++i) {
    dual.f[i].assign(problem.mus[i].size(), 0.0);
    dual.g[i].assign(problem.nus[i].size(), 0.0);
    for (std::size_t a = 0; a < problem.mus[i].size(); ++a) {
      int r = layout.mu_row[i][a];
      dual.f[i][a] = r >= 0 ? lp_solution.dual[r] : 0.0;
    }
    for (std::size_t b = 0; b < problem.nus[i].size(); ++b) {
      int r = layout.nu_row[i][b];
      dual.g[i][b] = r >= 0 ? -lp_solution.dual[r] : 0.0;
    }
  }
  dual.h.assign(problem.x_size(), std::vector<double>(problem.d, 0.0));
  for (int xi = 0; xi < problem.x_size(); ++xi)
    for (int i = 0; i < problem.d; ++i)
      dual.h[xi][i] = lp_solution.dual[layout.mart_row(problem, xi, i)];

  for (int i = 0; i < problem.d; ++i) {
    for (double v : dual.f[i])
      if (!std::isfinite(v)) throw std::runtime_error("uncertified dual: non-finite entry");
    for (double v : dual.g[i])
      if (!std::isfinite(v)) throw std::runtime_error("uncertified dual: non-finite entry");
  }

  JointPlan plan(problem.d, problem.x_grid, problem.y_grid);
  int ny = problem.y_size();
  for (int v = 0; v < problem.n_vars(); ++v)
    if (lp_solution.primal[v] > 1e-12) plan.add_entry(v / ny, v % ny, lp_solution.primal[v]);
  CertificationReport report = certify_dual(dual, problem, &plan);
  if (!report.pass(1e-8)) {
    std::ostringstream os;
    os << "uncertified dual: max violation " << report.max_violation << ", support residual "
       << report.max_support_residual;
    throw std::runtime_error(os.str());
  }
  return dual;
}

DualTriple gauge_normalize(const DualTriple& dual, const MmotProblem& problem) {
  DualTriple out = dual;
  double f_shift = 0.0, g_shift = 0.0;
  for (int i = 1; i < problem.d; ++i) {
    double mi = 0.0;
    for (std::size_t a = 0; a < problem.mus[i].size(); ++a)
      mi += out.f[i][a] * problem.mus[i].atoms()[a].weight;
    mi /= problem.mus[i].mass();
    for (double& v : out.f[i]) v -= mi;
    f_shift += mi;
    double ei = 0.0;
    for (std::size_t b = 0; b < problem.nus[i].size(); ++b)
      ei += out.g[i][b] * problem.nus[i].atoms()[b].weight;
    ei /= problem.nus[i].mass();
    for (double& v : out.g[i]) v -= ei;
    g_shift += ei;
  }
  for (double& v : out.f[0]) v += f_shift;
  for (double& v : out.g[0]) v += g_shift;
  return out;
}

double duality_gap(const MmotProblem& problem, const PrimalResult& primal,
                   const DualTriple& dual) {
  double p_value = plan_cost(problem, primal.plan);
  return p_value - dual_objective(dual, problem);
}

double duality_gap(const MmotProblem& problem) {
  PrimalResult primal = solve_primal(problem);
  DualTriple dual = recover_dual(problem, primal.lp);
  return duality_gap(problem, primal, dual);
}

JointPlan product_feasible_plan(const MmotProblem& problem) {
  std::vector<JointPlan> couplings;
  for (int i = 0; i < problem.d; ++i) {
    MmotProblem one = make_problem({problem.mus[i]}, {problem.nus[i]},
                                   CostSpec::from_table(std::vector<double>(
                                       problem.mus[i].size() * problem.nus[i].size(), 0.0)));
    couplings.push_back(solve_primal(one).plan);
  }
  JointPlan plan(problem.d, problem.x_grid, problem.y_grid);
  int ny = problem.y_size();
  // Walk the product of the per-coordinate sparse couplings.
  std::vector<std::vector<std::pair<std::pair<int, int>, double>>> entries(problem.d);
  for (int i = 0; i < problem.d; ++i)
    for (auto& [k, w] : couplings[i].entries()) entries[i].push_back({k, w});
  std::vector<std::size_t> pick(problem.d, 0);
  while (true) {
    double w = 1.0;
    int xi = 0, yi = 0;
    for (int i = 0; i < problem.d; ++i) {
      auto& [k, wi] = entries[i][pick[i]];
      w *= wi;
      xi = xi * static_cast<int>(problem.mus[i].size()) + k.first;
      yi = yi * static_cast<int>(problem.nus[i].size()) + k.second;
    }
    if (w > 1e-15) plan.add_entry(xi, yi, w);
    int i = problem.d - 1;
    while (i >= 0 && ++pick[i] == entries[i].size()) pick[i--] = 0;
    if (i < 0) break;
  }
  (void)ny;
  return plan;
}

double chi_from_dual(const DualTriple& dual, const MmotProblem& problem, const GridPoint& y) {
  double best = -std::numeric_limits<double>::infinity();
  for (int xi = 0; xi < problem.x_size(); ++xi) {
    double v = dual.f_sum(problem, xi);
    const GridPoint& x = problem.x_grid[xi];
    for (int i = 0; i < problem.d; ++i) v += dual.h[xi][i] * (y[i] - x[i]);
    best = std::max(best, v);
  }
  return best;
}

int chi_anchor_index(const MmotProblem& problem) {
  GridPoint target(problem.d);
  for (int i = 0; i < problem.d; ++i) target[i] = problem.mus[i].mean();
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int xi = 0; xi < problem.x_size(); ++xi) {
    double dist = 0.0;
    for (int i = 0; i < problem.d; ++i) {
      double t = problem.x_grid[xi][i] - target[i];
      dist += t * t;
    }
    if (dist < best_dist - 1e-15) {
      best_dist = dist;
      best = xi;
    }
  }
  return best;
}

double chi_normalized(const DualTriple& dual, const MmotProblem& problem, const GridPoint& y) {
  int anchor = chi_anchor_index(problem);
  const GridPoint& a = problem.x_grid[anchor];
  // Supporting affine piece at the anchor: first x attaining the max.
  double best = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int xi = 0; xi < problem.x_size(); ++xi) {
    double v = dual.f_sum(problem, xi);
    const GridPoint& x = problem.x_grid[xi];
    for (int i = 0; i < problem.d; ++i) v += dual.h[xi][i] * (a[i] - x[i]);
    if (v > best + 1e-15) {
      best = v;
      arg = xi;
    }
  }
  double chi_a = best;
  const std::vector<double>& slope = dual.h[arg];
  double value = chi_from_dual(dual, problem, y) - chi_a;
  for (int i = 0; i < problem.d; ++i) value -= slope[i] * (y[i] - a[i]);
  return value;
}

double feasibility_residual(const MmotProblem& problem, const JointPlan& plan) {
  LpLayout layout = lp_layout(problem);
  std::vector<double> lhs(layout.n_rows, 0.0);
  int ny = problem.y_size();
  (void)ny;
  for (auto& [k, w] : plan.entries()) {
    const std::vector<int>& xd = problem.x_digits(k.first);
    const std::vector<int>& yd = problem.y_digits(k.second);
    const GridPoint& x = problem.x_grid[k.first];
    const GridPoint& y = problem.y_grid[k.second];
    for (int i = 0; i < problem.d; ++i) {
      int rmu = layout.mu_row[i][xd[i]];
      if (rmu >= 0) lhs[rmu] += w;
      int rnu = layout.nu_row[i][yd[i]];
      if (rnu >= 0) lhs[rnu] += w;
      lhs[layout.mart_row(problem, k.first, i)] += w * (y[i] - x[i]);
    }
  }
  double worst = 0.0;
  for (int i = 0; i < problem.d; ++i) {
    for (std::size_t a = 0; a < problem.mus[i].size(); ++a) {
      int r = layout.mu_row[i][a];
      if (r >= 0) worst = std::max(worst, std::abs(lhs[r] - problem.mus[i].atoms()[a].weight));
    }
    for (std::size_t b = 0; b < problem.nus[i].size(); ++b) {
      int r = layout.nu_row[i][b];
      if (r >= 0) worst = std::max(worst, std::abs(lhs[r] - problem.nus[i].atoms()[b].weight));
    }
  }
  for (int r = layout.mart_offset; r < layout.n_rows; ++r)
    worst = std::max(worst, std::abs(lhs[r]));
  return worst;
}

double plan_cost(const MmotProblem& problem, const JointPlan& plan) {
  double c = 0.0;
  for (auto& [k, w] : plan.entries()) c += w * problem.cost_at(k.first, k.second);
  return c;
}

}  // namespace mmot
