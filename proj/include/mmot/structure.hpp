#pragma once

#include <vector>

#include "mmot/measures.hpp"

namespace mmot {

// One component (I_k, J_k, mu_k, nu_k) of the canonical decomposition of a
// convex-ordered pair. I is the open interval where the potentials are
// strictly separated; J adds any endpoint of I carrying a nu atom.
struct IrreducibleComponent {
  int index = 0;       // 1-based, left to right
  double lo = 0.0;     // endpoints of I; infinities allowed as sentinels
  double hi = 0.0;
  bool closed_lo = false;  // J includes the endpoint (positive nu mass there)
  bool closed_hi = false;
  DiscreteMeasure mu, nu;
};

struct Decomposition {
  DiscreteMeasure fixed;  // mu restricted to {u_mu = u_nu}; equals nu's fixed part
  std::vector<IrreducibleComponent> components;
};

// Canonical decomposition. The components are the maximal open intervals of
// {u_mu < u_nu} carrying mu's atoms; nu's mass at a shared interval endpoint
// is split by each component's 2x2 mass/mean system, resolved left to right.
// Throws if the pair is not in convex order, or "degenerate component" on
// float pathology in the endpoint system.
Decomposition irreducible_components(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// True iff the decomposition is a single component carrying all of mu's mass
// with no fixed part.
bool irreducibility_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

}  // namespace mmot
