#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "mmot/measures.hpp"
#include "mmot/mmot.hpp"
#include "mmot/structure.hpp"
#include "support/oracles.hpp"

using namespace mmot;

TEST_CASE("single irreducible component") {
  DiscreteMeasure mu = DiscreteMeasure::dirac(0.0);
  DiscreteMeasure nu = DiscreteMeasure::from_pairs({{-1, 0.5}, {1, 0.5}});
  Decomposition dec = irreducible_components(mu, nu);
  CHECK(dec.fixed.mass() == 0.0);
  REQUIRE(dec.components.size() == 1);
  const IrreducibleComponent& c = dec.components[0];
  CHECK(c.lo == doctest::Approx(-1.0));
  CHECK(c.hi == doctest::Approx(1.0));
  CHECK(c.closed_lo);
  CHECK(c.closed_hi);
  CHECK(c.mu.mass() == doctest::Approx(1.0));
  CHECK(c.nu.mass() == doctest::Approx(1.0));
  CHECK(irreducibility_check(mu, nu));
}

TEST_CASE("two components split a shared middle atom by the mass-mean system") {
  DiscreteMeasure mu = DiscreteMeasure::from_pairs({{-1, 0.5}, {1, 0.5}});
  DiscreteMeasure nu = DiscreteMeasure::from_pairs({{-2, 0.25}, {0, 0.5}, {2, 0.25}});
  // Potentials touch at 0: u_mu(0) = u_nu(0) = 1.
  CHECK(mu.potential(0.0) == doctest::Approx(nu.potential(0.0)));
  Decomposition dec = irreducible_components(mu, nu);
  CHECK(dec.fixed.mass() == 0.0);
  REQUIRE(dec.components.size() == 2);

  const IrreducibleComponent& left = dec.components[0];
  CHECK(left.lo == doctest::Approx(-2.0));
  CHECK(left.hi == doctest::Approx(0.0));
  CHECK(left.mu.weight_at(-1.0) == doctest::Approx(0.5));
  CHECK(left.nu.weight_at(-2.0) == doctest::Approx(0.25));
  CHECK(left.nu.weight_at(0.0) == doctest::Approx(0.25));

  const IrreducibleComponent& right = dec.components[1];
  CHECK(right.nu.weight_at(0.0) == doctest::Approx(0.25));
  CHECK(right.nu.weight_at(2.0) == doctest::Approx(0.25));

  CHECK_FALSE(irreducibility_check(mu, nu));
}

TEST_CASE("identical measures decompose into a pure fixed part") {
  std::mt19937 rng(2);
  DiscreteMeasure m = oracle::random_measure(rng, 5);
  Decomposition dec = irreducible_components(m, m);
  CHECK(dec.components.empty());
  CHECK(DiscreteMeasure::max_atom_difference(dec.fixed, m) <= 1e-12);
  CHECK_FALSE(irreducibility_check(m, m));
}

TEST_CASE("order violation is rejected") {
  DiscreteMeasure mu = DiscreteMeasure::from_pairs({{-1, 0.5}, {1, 0.5}});
  CHECK_THROWS_AS(irreducible_components(mu, DiscreteMeasure::dirac(0.0)),
                  std::invalid_argument);
}

TEST_CASE("reconstruction, component validity, and permutation invariance") {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    auto [mu, nu] = oracle::random_convex_ordered_pair(rng, 2 + trial % 5);
    Decomposition dec = irreducible_components(mu, nu);

    DiscreteMeasure mu_sum = dec.fixed;
    DiscreteMeasure nu_sum = dec.fixed;
    for (const IrreducibleComponent& c : dec.components) {
      mu_sum = mu_sum + c.mu;
      nu_sum = nu_sum + c.nu;
      CHECK(std::abs(c.mu.mass() - c.nu.mass()) <= 1e-9);
      CHECK(std::abs(c.mu.mass() * c.mu.mean() - c.nu.mass() * c.nu.mean()) <= 1e-9);
      // Strict potential separation at interior mu atoms.
      for (const Atom& a : c.mu.atoms()) {
        CHECK(a.position > c.lo);
        CHECK(a.position < c.hi);
        CHECK(c.nu.potential(a.position) - c.mu.potential(a.position) > 1e-12);
      }
      for (const Atom& b : c.nu.atoms()) {
        CHECK(b.position >= c.lo - 1e-12);
        CHECK(b.position <= c.hi + 1e-12);
      }
      CHECK(irreducibility_check(c.mu, c.nu));
    }
    CHECK(DiscreteMeasure::max_atom_difference(mu_sum, mu) <= 1e-9);
    CHECK(DiscreteMeasure::max_atom_difference(nu_sum, nu) <= 1e-9);

    // Atom order in the inputs must not matter.
    std::vector<Atom> shuffled_mu = mu.atoms(), shuffled_nu = nu.atoms();
    std::shuffle(shuffled_mu.begin(), shuffled_mu.end(), rng);
    std::shuffle(shuffled_nu.begin(), shuffled_nu.end(), rng);
    Decomposition again =
        irreducible_components(DiscreteMeasure(shuffled_mu), DiscreteMeasure(shuffled_nu));
    REQUIRE(again.components.size() == dec.components.size());
    for (std::size_t k = 0; k < dec.components.size(); ++k) {
      CHECK(DiscreteMeasure::max_atom_difference(again.components[k].mu,
                                                 dec.components[k].mu) <= 1e-12);
      CHECK(DiscreteMeasure::max_atom_difference(again.components[k].nu,
                                                 dec.components[k].nu) <= 1e-12);
    }
  }
}

TEST_CASE("martingale couplings of a component are intertwined") {
  // Every z strictly inside a component's interval must be straddled by some
  // conditional of every martingale coupling; checked on LP couplings.
  std::mt19937 rng(59);
  for (int trial = 0; trial < 6; ++trial) {
    auto [mu, nu] = oracle::random_convex_ordered_pair(rng, 2 + trial % 3);
    Decomposition dec = irreducible_components(mu, nu);
    for (const IrreducibleComponent& comp : dec.components) {
      double scale = comp.mu.mass();
      MmotProblem one = make_problem({comp.mu.scaled(1.0 / scale)},
                                     {comp.nu.scaled(1.0 / scale)}, CostSpec::pos_norm(2.0));
      JointPlan plan = solve_primal(one).plan;
      std::vector<double> probes;
      for (const Atom& a : comp.mu.atoms()) probes.push_back(a.position);
      for (std::size_t k = 0; k + 1 < comp.nu.size(); ++k)
        probes.push_back(0.5 * (comp.nu.atoms()[k].position + comp.nu.atoms()[k + 1].position));
      for (double z : probes) {
        if (z <= comp.lo + 1e-9 || z >= comp.hi - 1e-9) continue;
        bool straddled = false;
        for (const Conditional& cond : disintegrate(plan)) {
          double lo = 1e30, hi = -1e30;
          for (auto& [yi, w] : cond.weights) {
            (void)w;
            lo = std::min(lo, plan.y_grid()[yi][0]);
            hi = std::max(hi, plan.y_grid()[yi][0]);
          }
          if (lo < z - 1e-12 && z + 1e-12 < hi) straddled = true;
        }
        CHECK(straddled);
      }
    }
  }
}
