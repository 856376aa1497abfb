#pragma once

#include <string>
#include <vector>

#include "mmot/measures.hpp"

namespace mmot {

// Cost functional c(x, y) on the product grid. Norm kinds require
// p in (1, inf), which makes the norm strictly convex and differentiable off
// the diagonal. Table costs are defined only on grid pairs.
struct CostSpec {
  enum class Kind { neg_norm, pos_norm, max_norm, neg_product_pair, table };

  Kind kind = Kind::pos_norm;
  double p = 2.0;                // norm exponent for neg_norm / pos_norm
  int sign = 1;                  // +1 or -1 for max_norm
  int i = 0, j = 1;              // coordinate pair for neg_product_pair (0-based)
  std::vector<double> table;     // row-major |X| x |Y| values for kind = table

  static CostSpec neg_norm(double p = 2.0);
  static CostSpec pos_norm(double p = 2.0);
  static CostSpec max_norm(int sign = 1);
  static CostSpec neg_product_pair(int i, int j);
  static CostSpec from_table(std::vector<double> values);

  bool is_table() const { return kind == Kind::table; }

  // Analytic evaluation at arbitrary points; throws for table costs.
  double eval(const GridPoint& x, const GridPoint& y) const;

  // True where the analytic kinds are differentiable in y.
  bool differentiable_at(const GridPoint& x, const GridPoint& y, double margin) const;

  std::string kind_name() const;
  void validate(int d) const;
};

double norm_p(const std::vector<double>& v, double p);

}  // namespace mmot
