#include "mmot/cost.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmot {

CostSpec CostSpec::neg_norm(double p) {
  CostSpec c;
  c.kind = Kind::neg_norm;
  c.p = p;
  return c;
}

CostSpec CostSpec::pos_norm(double p) {
  CostSpec c;
  c.kind = Kind::pos_norm;
  c.p = p;
  return c;
}

CostSpec CostSpec::max_norm(int sign) {
  CostSpec c;
  c.kind = Kind::max_norm;
  c.sign = sign;
  return c;
}

CostSpec CostSpec::neg_product_pair(int i, int j) {
  CostSpec c;
  c.kind = Kind::neg_product_pair;
  c.i = i;
  c.j = j;
  return c;
}

CostSpec CostSpec::from_table(std::vector<double> values) {
  CostSpec c;
  c.kind = Kind::table;
  c.table = std::move(values);
  return c;
}

double norm_p(const std::vector<double>& v, double p) {
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return s == 0.0 ? 0.0 : std::pow(s, 1.0 / p);
}

double CostSpec::eval(const GridPoint& x, const GridPoint& y) const {
  switch (kind) {
    case Kind::neg_norm:
    case Kind::pos_norm: {
      std::vector<double> diff(x.size());
      for (std::size_t k = 0; k < x.size(); ++k) diff[k] = x[k] - y[k];
      double n = norm_p(diff, p);
      return kind == Kind::neg_norm ? -n : n;
    }
    case Kind::max_norm: {
      double m = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) m = std::max(m, std::abs(x[k] - y[k]));
      return sign * m;
    }
    case Kind::neg_product_pair:
      return -y.at(i) * y.at(j);
    case Kind::table:
      throw std::invalid_argument("table cost has no off-grid evaluation");
  }
  throw std::logic_error("unknown cost kind");
}

bool CostSpec::differentiable_at(const GridPoint& x, const GridPoint& y, double margin) const {
  switch (kind) {
    case Kind::neg_norm:
    case Kind::pos_norm: {
      // For p in (1, inf) the only kink of y -> ||x-y||_p is at y = x.
      std::vector<double> diff(x.size());
      for (std::size_t k = 0; k < x.size(); ++k) diff[k] = x[k] - y[k];
      return norm_p(diff, 2.0) > margin;
    }
    case Kind::max_norm: {
      // Kink where the maximizing coordinate ties.
      double best = -1.0, second = -1.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        double v = std::abs(x[k] - y[k]);
        if (v > best) {
          second = best;
          best = v;
        } else if (v > second) {
          second = v;
        }
      }
      return best - second > margin && best > margin;
    }
    case Kind::neg_product_pair:
      return true;
    case Kind::table:
      return false;
  }
  return false;
}

std::string CostSpec::kind_name() const {
  switch (kind) {
    case Kind::neg_norm: return "neg_norm";
    case Kind::pos_norm: return "pos_norm";
    case Kind::max_norm: return "max_norm";
    case Kind::neg_product_pair: return "neg_product_pair";
    case Kind::table: return "table";
  }
  return "?";
}

void CostSpec::validate(int d) const {
  switch (kind) {
    case Kind::neg_norm:
    case Kind::pos_norm:
      if (!(p > 1.0) || !std::isfinite(p))
        throw std::invalid_argument("norm cost requires p in (1, inf)");
      break;
    case Kind::max_norm:
      if (sign != 1 && sign != -1) throw std::invalid_argument("max_norm sign must be +-1");
      break;
    case Kind::neg_product_pair:
      if (i < 0 || j < 0 || i >= d || j >= d || i == j)
        throw std::invalid_argument("neg_product_pair needs two distinct coordinates");
      break;
    case Kind::table:
      break;  // dimensions checked against the grids at problem construction
  }
}

}  // namespace mmot
