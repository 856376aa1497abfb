#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mmot/measures.hpp"
#include "support/oracles.hpp"

using namespace mmot;

namespace {

DiscreteMeasure symmetric_pm1() { return DiscreteMeasure::from_pairs({{-1, 0.5}, {1, 0.5}}); }

}  // namespace

TEST_CASE("potential evaluation at atoms and off-grid points") {
  CHECK(symmetric_pm1().potential(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(DiscreteMeasure::dirac(0.0).potential(2.0) == doctest::Approx(2.0).epsilon(1e-12));

  DiscreteMeasure m = DiscreteMeasure::from_pairs({{-2, 0.25}, {0, 0.5}, {2, 0.25}});
  // Frozen from the direct summation 0.25*2 + 0.5*0 + 0.25*2.
  double direct = 0.0;
  for (auto& a : m.atoms()) direct += a.weight * std::abs(0.0 - a.position);
  CHECK(direct == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.potential(0.0) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_WITH_AS(DiscreteMeasure().potential(0.0), "empty measure",
                       std::invalid_argument);
}

TEST_CASE("potential is convex and Lipschitz per unit mass") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> point(-4.0, 4.0);
  for (int trial = 0; trial < 20; ++trial) {
    DiscreteMeasure m = oracle::random_measure(rng, 1 + trial % 5);
    for (int probe = 0; probe < 40; ++probe) {
      double a = point(rng), b = point(rng);
      CHECK(std::abs(m.potential(a) - m.potential(b)) <= m.mass() * std::abs(a - b) + 1e-12);
      double mid = 0.5 * (a + b);
      CHECK(m.potential(mid) <= 0.5 * (m.potential(a) + m.potential(b)) + 1e-12);
    }
  }
}

TEST_CASE("convex order check") {
  DiscreteMeasure dirac0 = DiscreteMeasure::dirac(0.0);
  CHECK(convex_order_check(dirac0, symmetric_pm1(), 1e-9).ordered);

  ConvexOrderResult reversed = convex_order_check(symmetric_pm1(), dirac0, 1e-9);
  CHECK_FALSE(reversed.ordered);
  REQUIRE(reversed.witness.has_value());
  CHECK(reversed.witness->point == doctest::Approx(0.0));
  CHECK(reversed.witness->gap == doctest::Approx(1.0).epsilon(1e-12));

  DiscreteMeasure skewed = DiscreteMeasure::from_pairs({{-1, 0.5}, {2, 0.5}});
  ConvexOrderResult mean = convex_order_check(dirac0, skewed, 1e-9);
  CHECK_FALSE(mean.ordered);
  CHECK(mean.failure == OrderFailure::mean_mismatch);

  CHECK_THROWS_AS(convex_order_check(DiscreteMeasure(), dirac0, 1e-9), std::invalid_argument);
}

TEST_CASE("mutual convex order forces atomwise equality") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    auto [mu, nu] = oracle::random_convex_ordered_pair(rng, 2 + trial % 4);
    bool forward = convex_order_check(mu, nu, 1e-9).ordered;
    bool backward = convex_order_check(nu, mu, 1e-9).ordered;
    CHECK(forward);
    if (forward && backward)
      CHECK(DiscreteMeasure::max_atom_difference(mu, nu) <= 1e-9);
  }
  DiscreteMeasure m = oracle::random_measure(rng, 4);
  CHECK(convex_order_check(m, m, 1e-9).ordered);
  CHECK(convex_order_check(m, m, 1e-9).ordered);
  CHECK(DiscreteMeasure::max_atom_difference(m, m) == 0.0);
}

TEST_CASE("copulas of a plan") {
  JointPlan point(2, {{0, 0}}, {{1, 1}});
  point.add_entry(0, 0, 1.0);
  auto [p1, p2] = copulas_of(point);
  CHECK(p1.weight_at({0, 0}) == doctest::Approx(1.0));
  CHECK(p2.weight_at({1, 1}) == doctest::Approx(1.0));

  JointPlan split(2, {{0, 0}}, {{-1, -1}, {1, 1}});
  split.add_entry(0, 0, 0.5);
  split.add_entry(0, 1, 0.5);
  auto [q1, q2] = copulas_of(split);
  CHECK(q1.weight_at({0, 0}) == doctest::Approx(1.0));
  CHECK(q2.weight_at({-1, -1}) == doctest::Approx(0.5));
  CHECK(q2.weight_at({1, 1}) == doctest::Approx(0.5));
  CHECK(q1.mass() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(q2.mass() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("disintegration of martingale plans") {
  JointPlan plan(1, {{0.0}}, {{-1.0}, {1.0}});
  plan.add_entry(0, 0, 0.5);
  plan.add_entry(0, 1, 0.5);
  auto conds = disintegrate(plan);
  REQUIRE(conds.size() == 1);
  CHECK(conds[0].mass == doctest::Approx(1.0));
  CHECK(conditional_barycenter(plan, conds[0])[0] == doctest::Approx(0.0).epsilon(1e-12));

  JointPlan identity(1, {{-1.0}, {2.0}}, {{-1.0}, {2.0}});
  identity.add_entry(0, 0, 0.25);
  identity.add_entry(1, 1, 0.75);
  for (const Conditional& c : disintegrate(identity)) {
    REQUIRE(c.weights.size() == 1);
    CHECK(c.weights[0].second == doctest::Approx(1.0));
    CHECK(conditional_barycenter(identity, c)[0] ==
          doctest::Approx(identity.x_grid()[c.x_index][0]));
  }
}

TEST_CASE("atomwise minimum of grid measures") {
  PointMeasure a({{0.0}, {1.0}}, {0.5, 0.5});
  PointMeasure same = measure_min(a, a);
  CHECK(same.mass() == doctest::Approx(1.0));
  CHECK(same.weight_at({0.0}) == doctest::Approx(0.5));

  PointMeasure disjoint({{5.0}}, {1.0});
  CHECK(measure_min(a, disjoint).mass() == 0.0);

  PointMeasure b({{0.0}, {2.0}}, {0.25, 0.75});
  PointMeasure m = measure_min(a, b);
  CHECK(m.mass() == doctest::Approx(0.25));
  CHECK(m.weight_at({0.0}) == doctest::Approx(0.25));

  // Dominated by both inputs, atom by atom.
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    DiscreteMeasure x = oracle::random_measure(rng, 3), y = oracle::random_measure(rng, 3);
    std::vector<GridPoint> px, py;
    for (auto& at : x.atoms()) px.push_back({at.position});
    for (auto& at : y.atoms()) py.push_back({at.position});
    PointMeasure mx(px, [&] {
      std::vector<double> w;
      for (auto& at : x.atoms()) w.push_back(at.weight);
      return w;
    }());
    PointMeasure my(py, [&] {
      std::vector<double> w;
      for (auto& at : y.atoms()) w.push_back(at.weight);
      return w;
    }());
    PointMeasure mm = measure_min(mx, my);
    for (std::size_t k = 0; k < mm.size(); ++k) {
      CHECK(mm.weights()[k] <= mx.weight_at(mm.points()[k]) + 1e-15);
      CHECK(mm.weights()[k] <= my.weight_at(mm.points()[k]) + 1e-15);
    }
  }
}

TEST_CASE("diagonal pushforward") {
  PointMeasure d0({{0.0}}, {1.0});
  JointPlan plan = diagonal_pushforward(d0);
  CHECK(plan.entry(0, 0) == doctest::Approx(1.0));

  CHECK(diagonal_pushforward(PointMeasure()).mass() == 0.0);

  std::mt19937 rng(5);
  DiscreteMeasure m = oracle::random_measure(rng, 6);
  std::vector<GridPoint> pts;
  std::vector<double> ws;
  for (auto& at : m.atoms()) {
    pts.push_back({at.position});
    ws.push_back(at.weight);
  }
  PointMeasure pm(pts, ws);
  CHECK(diagonal_pushforward(pm).mass() == doctest::Approx(pm.mass()).epsilon(1e-12));
}

TEST_CASE("density discretization") {
  DiscreteMeasure two = discretize_density(DensitySpec::uniform(-0.5, 0.5), 2);
  REQUIRE(two.size() == 2);
  CHECK(two.atoms()[0].position == doctest::Approx(-0.25));
  CHECK(two.atoms()[1].position == doctest::Approx(0.25));
  CHECK(two.atoms()[0].weight == doctest::Approx(0.5));

  DiscreteMeasure four = discretize_density(DensitySpec::uniform(-1, 1), 4);
  REQUIRE(four.size() == 4);
  CHECK(four.atoms()[0].position == doctest::Approx(-0.75));
  CHECK(four.atoms()[3].position == doctest::Approx(0.75));
  for (auto& a : four.atoms()) CHECK(a.weight == doctest::Approx(0.25));
  CHECK(four.mean() == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(discretize_density(DensitySpec::uniform(1, -1), 2), std::invalid_argument);
  CHECK_THROWS_AS(discretize_density(DensitySpec::uniform(-1, 1), 0), std::invalid_argument);
}

TEST_CASE("discretization refines upward in convex order") {
  for (int n : {1, 2, 3, 5, 8}) {
    DiscreteMeasure coarse = discretize_density(DensitySpec::uniform(-1, 1), n);
    DiscreteMeasure fine = discretize_density(DensitySpec::uniform(-1, 1), 2 * n);
    CHECK(convex_order_check(coarse, fine, 1e-9).ordered);
  }
  DensitySpec ramp = DensitySpec::table(0.0, 3.0, {1.0, 2.0, 0.5});
  for (int n : {2, 4, 6}) {
    DiscreteMeasure coarse = discretize_density(ramp, n);
    DiscreteMeasure fine = discretize_density(ramp, 2 * n);
    CHECK(coarse.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(coarse.mean() == doctest::Approx(fine.mean()).epsilon(1e-12));
    CHECK(convex_order_check(coarse, fine, 1e-9).ordered);
  }
}

TEST_CASE("plan mass bookkeeping") {
  JointPlan plan(1, {{0.0}}, {{-1.0}, {1.0}});
  plan.add_entry(0, 0, 0.5);
  plan.add_entry(0, 1, 0.5);
  CHECK_NOTHROW(plan.check_probability());
  auto [p1, p2] = copulas_of(plan);
  CHECK(p1.mass() == doctest::Approx(plan.mass()).epsilon(1e-9));
  CHECK(p2.mass() == doctest::Approx(plan.mass()).epsilon(1e-9));
  CHECK_THROWS_AS(plan.add_entry(0, 5, 0.1), std::out_of_range);

  JointPlan sub(1, {{0.0}}, {{0.0}});
  sub.add_entry(0, 0, 0.25);
  CHECK_THROWS_AS(sub.check_probability(), std::runtime_error);
  CHECK(sub.normalized().mass() == doctest::Approx(1.0));
}
