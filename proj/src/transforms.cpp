#include "mmot/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmot {

void martingale_legendre(const std::vector<std::vector<double>>& g, const MmotProblem& problem,
                         std::vector<double>& alpha, std::vector<std::vector<double>>& gamma,
                         std::vector<char>* gamma_unique) {
  int nx = problem.x_size(), ny = problem.y_size();
  std::vector<double> gsum(ny);
  for (int yi = 0; yi < ny; ++yi) {
    double s = 0.0;
    for (int i = 0; i < problem.d; ++i) s += g[i][problem.y_digits(yi)[i]];
    gsum[yi] = s;
  }
  alpha.assign(nx, 0.0);
  gamma.assign(nx, std::vector<double>(problem.d, 0.0));
  if (gamma_unique) gamma_unique->assign(nx, 1);
  std::vector<double> values(ny);
  for (int xi = 0; xi < nx; ++xi) {
    for (int yi = 0; yi < ny; ++yi) values[yi] = gsum[yi] + problem.cost_at(xi, yi);
    BarycentricResult res = barycentric_min(problem.y_grid, values, problem.x_grid[xi]);
    if (!res.feasible) throw std::runtime_error("degenerate support");
    alpha[xi] = res.value;
    gamma[xi] = res.gradient;
    if (gamma_unique && res.degenerate) (*gamma_unique)[xi] = 0;
  }
}

std::vector<double> inverse_martingale_legendre(const std::vector<double>& alpha,
                                                const std::vector<std::vector<double>>& gamma,
                                                const MmotProblem& problem) {
  int nx = problem.x_size(), ny = problem.y_size();
  std::vector<double> beta(ny, -std::numeric_limits<double>::infinity());
  for (int xi = 0; xi < nx; ++xi) {
    const GridPoint& x = problem.x_grid[xi];
    for (int yi = 0; yi < ny; ++yi) {
      double v = alpha[xi] - problem.cost_at(xi, yi);
      const GridPoint& y = problem.y_grid[yi];
      for (int i = 0; i < problem.d; ++i) v += gamma[xi][i] * (y[i] - x[i]);
      if (v > beta[yi]) beta[yi] = v;
    }
  }
  return beta;
}

std::vector<std::vector<double>> coordinate_legendre_phi(const std::vector<double>& alpha,
                                                         const std::vector<std::vector<double>>& f,
                                                         const MmotProblem& problem) {
  std::vector<std::vector<double>> phi(problem.d);
  for (int j = 0; j < problem.d; ++j) {
    phi[j].assign(problem.mus[j].size(), std::numeric_limits<double>::infinity());
    for (int xi = 0; xi < problem.x_size(); ++xi) {
      const std::vector<int>& dig = problem.x_digits(xi);
      double acc = alpha[xi];
      for (int i = 0; i < j; ++i) acc -= phi[i][dig[i]];
      for (int i = j + 1; i < problem.d; ++i) acc -= f[i][dig[i]];
      phi[j][dig[j]] = std::min(phi[j][dig[j]], acc);
    }
  }
  return phi;
}

std::vector<std::vector<double>> coordinate_legendre_psi(const std::vector<double>& beta,
                                                         const std::vector<std::vector<double>>& g,
                                                         const MmotProblem& problem) {
  std::vector<std::vector<double>> psi(problem.d);
  for (int j = 0; j < problem.d; ++j) {
    psi[j].assign(problem.nus[j].size(), -std::numeric_limits<double>::infinity());
    for (int yi = 0; yi < problem.y_size(); ++yi) {
      const std::vector<int>& dig = problem.y_digits(yi);
      double acc = beta[yi];
      for (int i = 0; i < j; ++i) acc -= psi[i][dig[i]];
      for (int i = j + 1; i < problem.d; ++i) acc -= g[i][dig[i]];
      psi[j][dig[j]] = std::max(psi[j][dig[j]], acc);
    }
  }
  return psi;
}

double lower_convex_envelope(const std::vector<GridPoint>& grid,
                             const std::vector<double>& values, const GridPoint& query) {
  BarycentricResult res = barycentric_min(grid, values, query);
  if (!res.feasible) throw std::runtime_error("outside hull");
  return res.value;
}

double lower_convex_envelope_1d(const std::vector<double>& positions,
                                const std::vector<double>& values, double query) {
  if (positions.empty() || positions.size() != values.size())
    throw std::invalid_argument("envelope input mismatch");
  std::vector<std::size_t> order(positions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return positions[a] < positions[b]; });
  // Lower hull by the monotone-chain turn test.
  std::vector<std::pair<double, double>> hull;
  for (std::size_t k : order) {
    std::pair<double, double> p{positions[k], values[k]};
    if (!hull.empty() && std::abs(hull.back().first - p.first) <= kCoordTol) {
      hull.back().second = std::min(hull.back().second, p.second);
      continue;
    }
    while (hull.size() >= 2) {
      auto& a = hull[hull.size() - 2];
      auto& b = hull[hull.size() - 1];
      double cross = (b.first - a.first) * (p.second - a.second) -
                     (p.first - a.first) * (b.second - a.second);
      if (cross <= 0) hull.pop_back();
      else break;
    }
    hull.push_back(p);
  }
  if (query < hull.front().first - kCoordTol || query > hull.back().first + kCoordTol)
    throw std::runtime_error("outside hull");
  for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
    auto& a = hull[s];
    auto& b = hull[s + 1];
    if (query <= b.first + kCoordTol) {
      double t = (query - a.first) / (b.first - a.first);
      t = std::clamp(t, 0.0, 1.0);
      return a.second + t * (b.second - a.second);
    }
  }
  return hull.back().second;
}

double envelope_h(const MmotProblem& problem, const std::vector<std::vector<double>>& g, int xi,
                  const GridPoint& query) {
  int ny = problem.y_size();
  std::vector<double> values(ny);
  for (int yi = 0; yi < ny; ++yi) {
    double s = problem.cost_at(xi, yi);
    for (int i = 0; i < problem.d; ++i) s += g[i][problem.y_digits(yi)[i]];
    values[yi] = s;
  }
  return lower_convex_envelope(problem.y_grid, values, query);
}

TransformBundle build_transform_bundle(const MmotProblem& problem, const DualTriple& dual) {
  TransformBundle bundle;
  martingale_legendre(dual.g, problem, bundle.alpha, bundle.gamma, &bundle.gamma_unique);
  bundle.beta = inverse_martingale_legendre(bundle.alpha, bundle.gamma, problem);
  bundle.phi = coordinate_legendre_phi(bundle.alpha, dual.f, problem);
  bundle.psi = coordinate_legendre_psi(bundle.beta, dual.g, problem);
  return bundle;
}

CopulaOptimalityReport verify_copula_optimality(const DualTriple& dual, const JointPlan& plan,
                                                const TransformBundle& bundle,
                                                const MmotProblem& problem) {
  CopulaOptimalityReport report;
  for (int xi = 0; xi < problem.x_size(); ++xi) {
    double gap = dual.f_sum(problem, xi) - bundle.alpha[xi];
    report.grid_f_violation = std::max(report.grid_f_violation, gap);
  }
  for (int yi = 0; yi < problem.y_size(); ++yi) {
    double gap = bundle.beta[yi] - dual.g_sum(problem, yi);
    report.grid_g_violation = std::max(report.grid_g_violation, gap);
  }
  std::vector<double> xw = plan.x_weights(), yw = plan.y_weights();
  for (int xi = 0; xi < problem.x_size(); ++xi)
    if (xw[xi] > 0)
      report.support_f_residual = std::max(
          report.support_f_residual, std::abs(dual.f_sum(problem, xi) - bundle.alpha[xi]));
  for (int yi = 0; yi < problem.y_size(); ++yi)
    if (yw[yi] > 0)
      report.support_g_residual = std::max(
          report.support_g_residual, std::abs(dual.g_sum(problem, yi) - bundle.beta[yi]));
  return report;
}

}  // namespace mmot
