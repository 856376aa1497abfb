#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "mmot/lp.hpp"
#include "support/oracles.hpp"

using namespace mmot;

namespace {

LinearProgram tiny_equality() {
  // min x s.t. x = 1
  LinearProgram lp;
  lp.n_vars = 1;
  lp.objective = {1.0};
  lp.add_row({{0}, {1.0}, 1.0});
  return lp;
}

LinearProgram transport_2x2() {
  // Transport with cost [[0,1],[1,0]] and half/half marginals.
  LinearProgram lp;
  lp.n_vars = 4;  // x00 x01 x10 x11
  lp.objective = {0.0, 1.0, 1.0, 0.0};
  lp.add_row({{0, 1}, {1.0, 1.0}, 0.5});
  lp.add_row({{2, 3}, {1.0, 1.0}, 0.5});
  lp.add_row({{0, 2}, {1.0, 1.0}, 0.5});
  lp.add_row({{1, 3}, {1.0, 1.0}, 0.5});
  return lp;
}

LinearProgram random_lp(std::mt19937& rng, int n, int m) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  LinearProgram lp;
  lp.n_vars = n;
  for (int j = 0; j < n; ++j) lp.objective.push_back(coef(rng));
  // Feasible by construction: rhs = A * (random nonnegative point).
  std::vector<double> x0(n);
  for (double& v : x0) v = pos(rng);
  for (int r = 0; r < m; ++r) {
    SparseRow row;
    double rhs = 0.0;
    for (int j = 0; j < n; ++j) {
      double c = coef(rng);
      if (std::abs(c) < 0.3) continue;
      row.idx.push_back(j);
      row.val.push_back(c);
      rhs += c * x0[j];
    }
    row.rhs = rhs;
    lp.add_row(std::move(row));
  }
  return lp;
}

}  // namespace

TEST_CASE("single equality") {
  LpSolution sol = solve_lp(tiny_equality());
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.primal[0] == doctest::Approx(1.0));
  CHECK(sol.dual[0] == doctest::Approx(1.0));
}

TEST_CASE("2x2 transport hits the zero-cost diagonal") {
  LpSolution sol = solve_lp(transport_2x2());
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective_value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sol.primal[0] == doctest::Approx(0.5));
  CHECK(sol.primal[3] == doctest::Approx(0.5));
  KktReport kkt = check_kkt(transport_2x2(), sol, 1e-10);
  CHECK(kkt.max_primal_residual <= 1e-10);
  CHECK(kkt.max_dual_violation <= 1e-10);
  CHECK(kkt.max_cs_gap <= 1e-10);
}

TEST_CASE("redundant duplicate rows are harmless") {
  LinearProgram lp = transport_2x2();
  lp.add_row(lp.rows[0]);
  lp.add_row(lp.rows[2]);
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective_value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(check_kkt(lp, sol, 1e-8).pass(1e-8));
}

TEST_CASE("infeasible and unbounded detection") {
  LinearProgram infeasible;
  infeasible.n_vars = 1;
  infeasible.objective = {0.0};
  infeasible.add_row({{0}, {1.0}, 1.0});
  infeasible.add_row({{0}, {1.0}, 2.0});
  CHECK(solve_lp(infeasible).status == LpStatus::infeasible);

  LinearProgram unbounded;
  unbounded.n_vars = 2;
  unbounded.objective = {-1.0, 0.0};
  unbounded.add_row({{0, 1}, {1.0, -1.0}, 0.0});
  CHECK(solve_lp(unbounded).status == LpStatus::unbounded);
}

TEST_CASE("kkt report flags a perturbed primal") {
  LpSolution sol = solve_lp(transport_2x2());
  sol.primal[0] += 1e-3;
  KktReport kkt = check_kkt(transport_2x2(), sol, 1e-8);
  CHECK(kkt.max_primal_residual == doctest::Approx(1e-3).epsilon(1e-6));
  CHECK_FALSE(kkt.pass(1e-8));
}

TEST_CASE("zero LP has zero residuals") {
  LinearProgram lp;
  lp.n_vars = 3;
  lp.objective = {0.0, 0.0, 0.0};
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  KktReport kkt = check_kkt(lp, sol, 1e-12);
  CHECK(kkt.max_primal_residual == 0.0);
  CHECK(kkt.max_dual_violation == 0.0);
  CHECK(kkt.max_cs_gap == 0.0);
}

TEST_CASE("strong duality and kkt on random instances") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    LinearProgram lp = random_lp(rng, 3 + trial % 6, 1 + trial % 4);
    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal) continue;
    double dual_value = 0.0;
    for (std::size_t r = 0; r < lp.rows.size(); ++r) dual_value += sol.dual[r] * lp.rows[r].rhs;
    CHECK(std::abs(sol.objective_value - dual_value) <= 1e-8);
    CHECK(check_kkt(lp, sol, 1e-8).pass(1e-8));
  }
}

TEST_CASE("matches exhaustive vertex enumeration on small instances") {
  std::mt19937 rng(23);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    LinearProgram lp = random_lp(rng, 2 + trial % 8, 1 + trial % 4);
    if (lp.n_vars > 9) continue;
    LpSolution sol = solve_lp(lp);
    auto brute = oracle::enumerate_lp_optimum(lp);
    if (sol.status == LpStatus::optimal) {
      ++solved;
      REQUIRE(brute.has_value());
      CHECK(sol.objective_value == doctest::Approx(*brute).epsilon(1e-10));
    }
  }
  CHECK(solved > 20);
}

TEST_CASE("determinism and scale covariance") {
  std::mt19937 rng(31);
  LinearProgram lp = random_lp(rng, 7, 3);
  for (double& c : lp.objective) c = std::abs(c) + 0.1;  // bounded below on x >= 0
  LpSolution a = solve_lp(lp);
  LpSolution b = solve_lp(lp);
  REQUIRE(a.status == LpStatus::optimal);
  CHECK(a.basis == b.basis);
  REQUIRE(a.primal.size() == b.primal.size());
  for (std::size_t j = 0; j < a.primal.size(); ++j) CHECK(a.primal[j] == b.primal[j]);

  LinearProgram scaled = lp;
  for (double& c : scaled.objective) c *= 3.5;
  LpSolution s = solve_lp(scaled);
  CHECK(s.basis == a.basis);
  CHECK(s.objective_value == doctest::Approx(3.5 * a.objective_value).epsilon(1e-10));
}

TEST_CASE("lp dump round-trips") {
  LinearProgram lp = transport_2x2();
  std::stringstream ss;
  dump_lp(lp, ss);
  LinearProgram back = parse_lp_dump(ss);
  CHECK(back.n_vars == lp.n_vars);
  REQUIRE(back.rows.size() == lp.rows.size());
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    CHECK(back.rows[r].rhs == lp.rows[r].rhs);
    CHECK(back.rows[r].idx == lp.rows[r].idx);
    CHECK(back.rows[r].val == lp.rows[r].val);
  }
  CHECK(solve_lp(back).objective_value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("barycentric program values and duals") {
  std::vector<std::vector<double>> pts = {{-1.0}, {0.0}, {1.0}};
  std::vector<double> vals = {1.0, 2.0, 1.0};
  BarycentricResult res = barycentric_min(pts, vals, {0.0});
  REQUIRE(res.feasible);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-10));
  // Support function value at the query equals the optimum.
  CHECK(res.support_constant == doctest::Approx(res.value).epsilon(1e-10));

  CHECK_FALSE(barycentric_min(pts, vals, {2.0}).feasible);
  CHECK(barycentric_feasible(pts, {0.25}));
  CHECK_FALSE(barycentric_feasible(pts, {-1.5}));
}
