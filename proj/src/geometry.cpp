#include "mmot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mmot/lp.hpp"

namespace mmot {

std::vector<std::size_t> extreme_points_of(const std::vector<GridPoint>& points, double tol) {
  (void)tol;
  if (points.empty()) throw std::invalid_argument("extreme_points_of needs points");
  std::vector<std::size_t> kept;
  if (points.size() <= 2) {
    for (std::size_t i = 0; i < points.size(); ++i) kept.push_back(i);
    return kept;
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<GridPoint> others;
    others.reserve(points.size() - 1);
    for (std::size_t j = 0; j < points.size(); ++j)
      if (j != i) others.push_back(points[j]);
    if (!barycentric_feasible(others, points[i])) kept.push_back(i);
  }
  return kept;
}

ExtremalityReport check_conditional_extremality(const JointPlan& plan, double tol) {
  ExtremalityReport report;
  double total_mass = 0.0, weighted_fraction = 0.0;
  for (const Conditional& cond : disintegrate(plan)) {
    ExtremalityRecord rec;
    rec.x_index = cond.x_index;
    rec.mass = cond.mass;
    std::vector<GridPoint> support;
    std::vector<int> y_index;
    std::vector<double> weight;
    for (auto& [yi, w] : cond.weights) {
      if (w < tol) continue;
      support.push_back(plan.y_grid()[yi]);
      y_index.push_back(yi);
      weight.push_back(w);
    }
    rec.support_size = static_cast<int>(support.size());
    double kept_mass = 0.0, extreme_mass = 0.0;
    for (double w : weight) kept_mass += w;
    if (!support.empty()) {
      std::vector<std::size_t> extremes = extreme_points_of(support);
      std::vector<char> is_extreme(support.size(), 0);
      for (std::size_t e : extremes) is_extreme[e] = 1;
      for (std::size_t k = 0; k < support.size(); ++k) {
        if (is_extreme[k]) extreme_mass += weight[k];
        else rec.non_extreme.push_back(y_index[k]);
      }
    }
    rec.extreme_fraction = kept_mass > 0 ? extreme_mass / kept_mass : 1.0;
    report.worst_fraction = std::min(report.worst_fraction, rec.extreme_fraction);
    total_mass += cond.mass;
    weighted_fraction += cond.mass * rec.extreme_fraction;
    report.records.push_back(std::move(rec));
  }
  if (total_mass > 0) {
    report.extreme_fraction_of_mass = weighted_fraction / total_mass;
    report.violating_mass = total_mass - weighted_fraction;
  }
  return report;
}

namespace {

int find_point(const std::vector<GridPoint>& grid, const GridPoint& p) {
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (points_equal(grid[i], p)) return static_cast<int>(i);
  return -1;
}

}  // namespace

StayingReport staying_decomposition(const JointPlan& plan) {
  auto [pi1, pi2] = copulas_of(plan);
  PointMeasure shared = measure_min(pi1, pi2);
  StayingReport report;
  report.diagonal_mass = shared.mass();
  report.dominance_ok = true;
  report.residual = JointPlan(plan.dim(), plan.x_grid(), plan.y_grid());
  std::map<std::pair<int, int>, double> diag;
  for (std::size_t k = 0; k < shared.size(); ++k) {
    int xi = find_point(plan.x_grid(), shared.points()[k]);
    int yi = find_point(plan.y_grid(), shared.points()[k]);
    if (xi < 0 || yi < 0) continue;  // min support always lies on both grids
    double need = shared.weights()[k];
    if (plan.entry(xi, yi) < need - 1e-10) report.dominance_ok = false;
    diag[{xi, yi}] = need;
  }
  for (auto& [k, w] : plan.entries()) {
    auto it = diag.find(k);
    double rest = w - (it == diag.end() ? 0.0 : it->second);
    if (rest > 1e-15) report.residual.add_entry(k.first, k.second, rest);
  }
  return report;
}

bool twist_check(const CostSpec& cost, const std::vector<int>& S, const GridPoint& x,
                 const std::vector<double>& yS, const std::vector<DiscreteMeasure>& nus,
                 double tol) {
  int d = static_cast<int>(x.size());
  if (S.empty()) throw std::invalid_argument("twist_check needs a nonempty block");
  std::vector<char> in_S(d, 0);
  for (int i : S) in_S.at(i) = 1;
  std::vector<int> complement;
  for (int i = 0; i < d; ++i)
    if (!in_S[i]) complement.push_back(i);
  if (yS.size() != S.size()) throw std::invalid_argument("partial coordinates size mismatch");

  const double h = 1e-6, h2 = 1e-7;
  auto gradient_block = [&](const GridPoint& y) {
    if (!cost.differentiable_at(x, y, 4 * h))
      throw std::runtime_error("kink encountered");
    std::vector<double> grad(S.size());
    for (std::size_t k = 0; k < S.size(); ++k) {
      GridPoint yp = y, ym = y;
      yp[S[k]] += h;
      ym[S[k]] -= h;
      double coarse = (cost.eval(x, yp) - cost.eval(x, ym)) / (2 * h);
      yp[S[k]] = y[S[k]] + h2;
      ym[S[k]] = y[S[k]] - h2;
      double fine = (cost.eval(x, yp) - cost.eval(x, ym)) / (2 * h2);
      if (std::abs(coarse - fine) > 1e-4 * std::max(1.0, std::abs(fine)))
        throw std::runtime_error("kink encountered");
      grad[k] = fine;
    }
    return grad;
  };

  std::vector<std::vector<double>> gradients;
  std::vector<std::size_t> pick(complement.size(), 0);
  while (true) {
    GridPoint y(d, 0.0);
    for (std::size_t k = 0; k < S.size(); ++k) y[S[k]] = yS[k];
    for (std::size_t k = 0; k < complement.size(); ++k)
      y[complement[k]] = nus[complement[k]].atoms()[pick[k]].position;
    gradients.push_back(gradient_block(y));
    if (complement.empty()) break;
    int i = static_cast<int>(complement.size()) - 1;
    while (i >= 0 && ++pick[i] == nus[complement[i]].size()) pick[i--] = 0;
    if (i < 0) break;
  }

  for (std::size_t a = 0; a < gradients.size(); ++a)
    for (std::size_t b = a + 1; b < gradients.size(); ++b) {
      double dist = 0.0;
      for (std::size_t k = 0; k < gradients[a].size(); ++k)
        dist = std::max(dist, std::abs(gradients[a][k] - gradients[b][k]));
      if (dist <= tol) return false;
    }
  return true;
}

GraphReport check_graph_structure(const JointPlan& plan, const std::vector<int>& S, double tol) {
  GraphReport report;
  std::vector<char> in_S(plan.dim(), 0);
  for (int i : S) in_S.at(i) = 1;
  for (const Conditional& cond : disintegrate(plan)) {
    // Group support atoms by their S coordinates.
    std::vector<int> group(cond.weights.size(), -1);
    int n_groups = 0;
    for (std::size_t a = 0; a < cond.weights.size(); ++a) {
      if (group[a] >= 0) continue;
      group[a] = n_groups++;
      const GridPoint& ya = plan.y_grid()[cond.weights[a].first];
      for (std::size_t b = a + 1; b < cond.weights.size(); ++b) {
        if (group[b] >= 0) continue;
        const GridPoint& yb = plan.y_grid()[cond.weights[b].first];
        bool same = true;
        for (int i : S)
          if (std::abs(ya[i] - yb[i]) > 1e-9) same = false;
        if (same) group[b] = group[a];
      }
    }
    for (int gid = 0; gid < n_groups; ++gid) {
      double spread = 0.0, group_mass = 0.0, max_weight = 0.0;
      for (std::size_t a = 0; a < cond.weights.size(); ++a) {
        if (group[a] != gid) continue;
        group_mass += cond.weights[a].second;
        max_weight = std::max(max_weight, cond.weights[a].second);
        for (std::size_t b = a + 1; b < cond.weights.size(); ++b) {
          if (group[b] != gid) continue;
          const GridPoint& ya = plan.y_grid()[cond.weights[a].first];
          const GridPoint& yb = plan.y_grid()[cond.weights[b].first];
          for (int i = 0; i < plan.dim(); ++i)
            if (!in_S[i]) spread = std::max(spread, std::abs(ya[i] - yb[i]));
        }
      }
      if (spread > tol) {
        GraphViolation v;
        v.x_index = cond.x_index;
        for (std::size_t a = 0; a < cond.weights.size(); ++a)
          if (group[a] == gid) {
            for (int i : S) v.yS.push_back(plan.y_grid()[cond.weights[a].first][i]);
            break;
          }
        v.mass = group_mass - max_weight;  // off-graph share of the group
        v.spread = spread;
        if (v.mass > tol) report.pass = false;
        report.violations.push_back(std::move(v));
      }
    }
  }
  return report;
}

ThreePointStructure three_point_structure_1d(const JointPlan& plan, double noise_floor) {
  if (plan.dim() != 1) throw std::invalid_argument("three_point_structure_1d needs d = 1");
  ThreePointStructure out;
  for (const Conditional& cond : disintegrate(plan)) {
    double x = plan.x_grid()[cond.x_index][0];
    ThreePointRow row;
    row.x = x;
    std::vector<std::pair<double, double>> moving;  // position, weight
    double kept = 0.0;
    for (auto& [yi, w] : cond.weights) {
      if (w < noise_floor) continue;
      kept += w;
      double y = plan.y_grid()[yi][0];
      if (std::abs(y - x) <= kCoordTol) row.stay += w;
      else moving.push_back({y, w});
    }
    if (moving.size() > 2) throw std::runtime_error("not three-point");
    std::sort(moving.begin(), moving.end());
    if (moving.size() == 2) {
      row.t_minus = moving[0].first;
      row.lambda_minus = moving[0].second;
      row.t_plus = moving[1].first;
      row.lambda_plus = moving[1].second;
    } else if (moving.size() == 1) {
      if (moving[0].first < x) {
        row.t_minus = moving[0].first;
        row.lambda_minus = moving[0].second;
        row.t_plus = x;
      } else {
        row.t_plus = moving[0].first;
        row.lambda_plus = moving[0].second;
        row.t_minus = x;
      }
    } else {
      row.t_minus = row.t_plus = x;
    }
    double weight_residual = std::abs(kept - 1.0);
    double barycenter = row.stay * x + row.lambda_minus * row.t_minus +
                        row.lambda_plus * row.t_plus +
                        (1.0 - kept) * x;  // floored noise treated as staying
    double barycenter_residual = std::abs(barycenter - x);
    double lambda_residual = 0.0;
    if (row.t_plus - row.t_minus > kCoordTol) {
      double span = row.t_plus - row.t_minus;
      double moving_mass = 1.0 - row.stay;
      lambda_residual = std::max(
          std::abs(row.lambda_minus - std::abs((row.t_plus - x) / span) * moving_mass),
          std::abs(row.lambda_plus - std::abs((row.t_minus - x) / span) * moving_mass));
    }
    out.max_weight_residual = std::max(out.max_weight_residual, weight_residual);
    out.max_barycenter_residual = std::max(out.max_barycenter_residual, barycenter_residual);
    out.max_lambda_residual = std::max(out.max_lambda_residual, lambda_residual);
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace mmot
