#include "mmot/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace mmot {

namespace {

constexpr double kReducedCostTol = 1e-9;   // entering threshold
constexpr double kPivotTol = 1e-7;         // smallest acceptable ratio-test pivot
constexpr double kDegenerateTol = 1e-11;   // basic value treated as zero
constexpr double kFeasibilityTol = 1e-10;  // phase-one target for artificials
constexpr int kBlandTrigger = 100;         // degenerate pivots before Bland engages
constexpr int kRefactorEvery = 64;

class Simplex {
 public:
  explicit Simplex(const LinearProgram& lp) : n_(lp.n_vars), m_(static_cast<int>(lp.rows.size())) {
    lp.validate();
    cost_ = lp.objective;
    flip_.assign(m_, 1.0);
    b_.assign(m_, 0.0);
    col_start_.assign(n_ + 1, 0);
    std::vector<std::vector<std::pair<int, double>>> cols(n_);
    for (int r = 0; r < m_; ++r) {
      double s = lp.rows[r].rhs < 0 ? -1.0 : 1.0;
      flip_[r] = s;
      b_[r] = s * lp.rows[r].rhs;
      for (std::size_t k = 0; k < lp.rows[r].idx.size(); ++k)
        cols[lp.rows[r].idx[k]].push_back({r, s * lp.rows[r].val[k]});
    }
    for (int j = 0; j < n_; ++j) {
      col_start_[j] = static_cast<int>(row_idx_.size());
      for (auto& [r, v] : cols[j]) {
        if (v == 0.0) continue;
        row_idx_.push_back(r);
        val_.push_back(v);
      }
    }
    col_start_[n_] = static_cast<int>(row_idx_.size());
    max_iterations_ = 50 * (n_ + m_);
    price_weight_.resize(n_);
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (int j = 0; j < n_; ++j) {
      state ^= state << 13;
      state ^= state >> 7;
      state ^= state << 17;
      price_weight_[j] = 1.0 + static_cast<double>(state >> 11) * 0x1.0p-53;
    }
  }

  LpSolution run() {
    LpSolution sol;
    if (m_ == 0) return solve_unconstrained();

    int restarts = 0;
    while (true) {
      reset_to_artificial_basis();
      phase_ = 1;
      iterate();
      if (restart_requested_) {
        if (++restarts > 2) throw SolverError("numerical stall: repeated basis repair");
        restart_requested_ = false;
        continue;
      }
      double infeas = 0.0;
      for (int r = 0; r < m_; ++r)
        if (basis_[r] >= n_) infeas += std::max(0.0, xb_[r]);
      if (infeas > kFeasibilityTol) {
        sol.status = LpStatus::infeasible;
        finalize(sol);
        return sol;
      }
      refactor();
      drive_out_artificials();

      phase_ = 2;
      bool bounded = iterate();
      if (restart_requested_) {
        if (++restarts > 2) throw SolverError("numerical stall: repeated basis repair");
        restart_requested_ = false;
        continue;
      }
      sol.status = bounded ? LpStatus::optimal : LpStatus::unbounded;
      finalize(sol);
      return sol;
    }
  }

 private:
  std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r) * m_ + c; }

  LpSolution solve_unconstrained() {
    LpSolution sol;
    for (int j = 0; j < n_; ++j)
      if (cost_[j] < -kReducedCostTol) {
        sol.status = LpStatus::unbounded;
        sol.primal.assign(n_, 0.0);
        return sol;
      }
    sol.status = LpStatus::optimal;
    sol.primal.assign(n_, 0.0);
    sol.objective_value = 0.0;
    return sol;
  }

  double phase_cost(int col) const {
    if (phase_ == 1) return col >= n_ ? 1.0 : 0.0;
    return col >= n_ ? 0.0 : cost_[col];
  }

  void compute_duals(std::vector<double>& y) const {
    y.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      double cb = phase_cost(basis_[r]);
      if (cb == 0.0) continue;
      const double* row = &binv_[idx(r, 0)];
      for (int c = 0; c < m_; ++c) y[c] += cb * row[c];
    }
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double rc = phase_cost(j);
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) rc -= y[row_idx_[k]] * val_[k];
    return rc;
  }

  void column_direction(int j, std::vector<double>& w) const {
    w.assign(m_, 0.0);
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      int rr = row_idx_[k];
      double v = val_[k];
      for (int r = 0; r < m_; ++r) w[r] += binv_[idx(r, rr)] * v;
    }
  }

  void reset_to_artificial_basis() {
    basis_.resize(m_);
    in_basis_.assign(n_, 0);
    for (int r = 0; r < m_; ++r) basis_[r] = n_ + r;
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) binv_[idx(r, r)] = 1.0;
    xb_ = b_;
  }

  // Rebuild the inverse from the basis columns with Gauss-Jordan elimination.
  // A numerically dependent basis column is replaced by the artificial of an
  // unpivoted row; if that repair breaks primal feasibility the solve is
  // restarted from the artificial basis.
  void refactor() {
    std::vector<double> B(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      int j = basis_[r];
      if (j >= n_) {
        B[idx(j - n_, r)] = 1.0;
      } else {
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
          B[idx(row_idx_[k], r)] = val_[k];
      }
    }
    std::vector<int> perm(m_);  // original row at each elimination position
    for (int r = 0; r < m_; ++r) perm[r] = r;
    std::vector<double>& inv = binv_;
    inv.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) inv[idx(r, r)] = 1.0;
    bool repaired = false;
    for (int col = 0; col < m_; ++col) {
      int piv = col;
      double best = std::abs(B[idx(col, col)]);
      for (int r = col + 1; r < m_; ++r) {
        double v = std::abs(B[idx(r, col)]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best < 1e-13) {
        // Replace this slot with the artificial of the best unpivoted row;
        // its transformed column is the corresponding column of inv.
        int best_row = -1, best_orig = -1;
        double best_piv = 1e-13;
        for (int r = col; r < m_; ++r) {
          bool already_basic = false;
          for (int s = 0; s < m_; ++s)
            if (basis_[s] == n_ + perm[r]) already_basic = true;
          if (already_basic) continue;
          double v = std::abs(inv[idx(r, perm[r])]);
          if (v > best_piv) {
            best_piv = v;
            best_row = r;
            best_orig = perm[r];
          }
        }
        if (best_row < 0) throw SolverError("numerical stall: basis repair failed");
        int old = basis_[col];
        if (old < n_) in_basis_[old] = 0;
        basis_[col] = n_ + best_orig;
        for (int r = 0; r < m_; ++r) B[idx(r, col)] = inv[idx(r, best_orig)];
        repaired = true;
        piv = best_row;
      }
      if (piv != col) {
        for (int c = 0; c < m_; ++c) {
          std::swap(B[idx(piv, c)], B[idx(col, c)]);
          std::swap(inv[idx(piv, c)], inv[idx(col, c)]);
        }
        std::swap(perm[piv], perm[col]);
      }
      double d = B[idx(col, col)];
      for (int c = 0; c < m_; ++c) {
        B[idx(col, c)] /= d;
        inv[idx(col, c)] /= d;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == col) continue;
        double f = B[idx(r, col)];
        if (f == 0.0) continue;
        for (int c = 0; c < m_; ++c) {
          B[idx(r, c)] -= f * B[idx(col, c)];
          inv[idx(r, c)] -= f * inv[idx(col, c)];
        }
      }
    }
    xb_.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r)
      for (int c = 0; c < m_; ++c) xb_[r] += binv_[idx(r, c)] * b_[c];
    if (repaired) {
      for (int r = 0; r < m_; ++r)
        if (xb_[r] < -1e-9 || (basis_[r] >= n_ && phase_ == 2 && xb_[r] > 1e-9))
          restart_requested_ = true;
    }
  }

  int select_entering(const std::vector<double>& y, bool bland) const {
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < n_; ++j) {
      if (in_basis_[j]) continue;
      double rc = reduced_cost(j, y);
      if (rc >= -kReducedCostTol) continue;
      if (bland) return j;
      // Fixed pseudo-random column weights spread the entering choices over
      // tied reduced costs, which otherwise stall on degenerate faces.
      double score = rc * price_weight_[j];
      if (score < best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  // Returns false on unbounded (phase 2 only).
  bool iterate() {
    std::vector<double> y, w;
    int degenerate_run = 0;
    bool bland = false;
    int since_refactor = 0;
    while (true) {
      compute_duals(y);
      int j = select_entering(y, bland);
      if (j < 0) {
        // Confirm optimality against a fresh factorization.
        refactor();
        if (restart_requested_) return true;
        since_refactor = 0;
        compute_duals(y);
        j = select_entering(y, bland);
        if (j < 0) return true;
      }
      column_direction(j, w);
      // Two-pass ratio test: find the tolerance-relaxed bound first, then take
      // the numerically best pivot among the rows inside it. Bland mode uses
      // the strict lowest-index rule instead.
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      const double slack = 1e-10;
      for (int r = 0; r < m_; ++r) {
        if (w[r] <= kPivotTol) continue;
        double ratio = (std::max(xb_[r], 0.0) + slack) / w[r];
        if (ratio < best_ratio) best_ratio = ratio;
      }
      if (best_ratio == std::numeric_limits<double>::infinity()) {
        if (phase_ == 1) throw SolverError("phase one unbounded");
        return false;
      }
      if (bland) {
        for (int r = 0; r < m_; ++r) {
          if (w[r] <= kPivotTol) continue;
          if (std::max(xb_[r], 0.0) / w[r] > best_ratio) continue;
          if (leave < 0 || basis_[r] < basis_[leave]) leave = r;
        }
      } else {
        for (int r = 0; r < m_; ++r) {
          if (w[r] <= kPivotTol) continue;
          if (std::max(xb_[r], 0.0) / w[r] > best_ratio) continue;
          if (leave < 0) {
            leave = r;
            continue;
          }
          bool r_art = basis_[r] >= n_, l_art = basis_[leave] >= n_;
          if (r_art != l_art) {
            if (r_art) leave = r;
          } else if (w[r] > w[leave] * (1.0 + 1e-12)) {
            leave = r;
          }
        }
      }
      best_ratio = std::max(xb_[leave], 0.0) / w[leave];
      pivot(j, leave, w);
      if (++iterations_ > max_iterations_) {
        std::ostringstream os;
        os << "iteration limit: " << iterations_ << " pivots (phase " << phase_ << ", " << n_
           << " vars, " << m_ << " rows)";
        throw SolverError(os.str());
      }
      if (best_ratio <= kDegenerateTol) {
        if (++degenerate_run >= kBlandTrigger) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      if (++since_refactor >= kRefactorEvery) {
        refactor();
        if (restart_requested_) return true;
        since_refactor = 0;
      }
    }
  }

  void pivot(int entering, int leave, const std::vector<double>& w) {
    double piv = w[leave];
    double* prow = &binv_[idx(leave, 0)];
    for (int c = 0; c < m_; ++c) prow[c] /= piv;
    double xl = xb_[leave] / piv;
    for (int r = 0; r < m_; ++r) {
      if (r == leave || w[r] == 0.0) continue;
      double f = w[r];
      double* row = &binv_[idx(r, 0)];
      for (int c = 0; c < m_; ++c) row[c] -= f * prow[c];
      xb_[r] -= f * xl;
    }
    xb_[leave] = xl;
    int old = basis_[leave];
    if (old < n_) in_basis_[old] = 0;
    basis_[leave] = entering;
    in_basis_[entering] = 1;
  }

  void drive_out_artificials() {
    std::vector<double> w;
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      int found = -1;
      for (int j = 0; j < n_ && found < 0; ++j) {
        if (in_basis_[j]) continue;
        double wr = 0.0;
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
          wr += binv_[idx(r, row_idx_[k])] * val_[k];
        if (std::abs(wr) > 1e-7) found = j;
      }
      if (found < 0) continue;  // redundant row: artificial stays basic at zero
      column_direction(found, w);
      pivot(found, r, w);
    }
  }

  void finalize(LpSolution& sol) {
    refactor();
    sol.primal.assign(n_, 0.0);
    for (int r = 0; r < m_; ++r)
      if (basis_[r] < n_) sol.primal[basis_[r]] = xb_[r];
    std::vector<double> y;
    compute_duals(y);
    sol.dual.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) sol.dual[r] = flip_[r] * y[r];
    sol.objective_value = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective_value += cost_[j] * sol.primal[j];
    sol.iterations = iterations_;
    sol.basis = basis_;
    for (int r = 0; r < m_; ++r)
      if (std::abs(xb_[r]) <= kDegenerateTol) sol.degenerate_vertex = true;
  }

  int n_ = 0, m_ = 0;
  std::vector<double> cost_, b_, flip_;
  std::vector<int> col_start_, row_idx_;
  std::vector<double> val_;
  std::vector<int> basis_;
  std::vector<char> in_basis_;
  std::vector<double> binv_, xb_;
  int phase_ = 1;
  int iterations_ = 0;
  int max_iterations_ = 0;
  bool restart_requested_ = false;
  std::vector<double> price_weight_;
};

}  // namespace

void LinearProgram::validate() const {
  if (n_vars < 0) throw std::invalid_argument("negative variable count");
  if (static_cast<int>(objective.size()) != n_vars)
    throw std::invalid_argument("objective size mismatch");
  for (double c : objective)
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite objective");
  for (const SparseRow& row : rows) {
    if (row.idx.size() != row.val.size()) throw std::invalid_argument("row index/value mismatch");
    if (!std::isfinite(row.rhs)) throw std::invalid_argument("non-finite rhs");
    for (std::size_t k = 0; k < row.idx.size(); ++k) {
      if (row.idx[k] < 0 || row.idx[k] >= n_vars) throw std::invalid_argument("row index range");
      if (!std::isfinite(row.val[k])) throw std::invalid_argument("non-finite coefficient");
    }
  }
}

LpSolution solve_lp(const LinearProgram& lp) { return Simplex(lp).run(); }

KktReport check_kkt(const LinearProgram& lp, const LpSolution& sol, double /*tol*/) {
  KktReport report;
  for (const SparseRow& row : lp.rows) {
    double lhs = 0.0;
    for (std::size_t k = 0; k < row.idx.size(); ++k) lhs += row.val[k] * sol.primal[row.idx[k]];
    report.max_primal_residual = std::max(report.max_primal_residual, std::abs(lhs - row.rhs));
  }
  for (double x : sol.primal)
    report.max_primal_residual = std::max(report.max_primal_residual, std::max(0.0, -x));
  std::vector<double> aty(lp.n_vars, 0.0);
  for (std::size_t r = 0; r < lp.rows.size(); ++r)
    for (std::size_t k = 0; k < lp.rows[r].idx.size(); ++k)
      aty[lp.rows[r].idx[k]] += sol.dual[r] * lp.rows[r].val[k];
  for (int j = 0; j < lp.n_vars; ++j) {
    double rc = lp.objective[j] - aty[j];
    report.max_dual_violation = std::max(report.max_dual_violation, -rc);
    report.max_cs_gap = std::max(report.max_cs_gap, std::abs(sol.primal[j] * rc));
  }
  report.max_dual_violation = std::max(report.max_dual_violation, 0.0);
  return report;
}

void dump_lp(const LinearProgram& lp, std::ostream& os) {
  os.precision(17);
  os << "lp " << lp.n_vars << " " << lp.rows.size() << "\n";
  os << "obj";
  for (double c : lp.objective) os << " " << c;
  os << "\n";
  for (const SparseRow& row : lp.rows) {
    os << "row " << row.rhs << " " << row.idx.size();
    for (std::size_t k = 0; k < row.idx.size(); ++k) os << " " << row.idx[k] << ":" << row.val[k];
    os << "\n";
  }
}

LinearProgram parse_lp_dump(std::istream& is) {
  LinearProgram lp;
  std::string tag;
  std::size_t n_rows = 0;
  if (!(is >> tag) || tag != "lp") throw std::invalid_argument("lp dump: missing header");
  if (!(is >> lp.n_vars >> n_rows)) throw std::invalid_argument("lp dump: bad header");
  if (!(is >> tag) || tag != "obj") throw std::invalid_argument("lp dump: missing objective");
  lp.objective.resize(lp.n_vars);
  for (int j = 0; j < lp.n_vars; ++j)
    if (!(is >> lp.objective[j])) throw std::invalid_argument("lp dump: bad objective");
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (!(is >> tag) || tag != "row") throw std::invalid_argument("lp dump: missing row");
    SparseRow row;
    std::size_t nnz = 0;
    if (!(is >> row.rhs >> nnz)) throw std::invalid_argument("lp dump: bad row header");
    for (std::size_t k = 0; k < nnz; ++k) {
      std::string cell;
      if (!(is >> cell)) throw std::invalid_argument("lp dump: truncated row");
      auto colon = cell.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("lp dump: bad cell");
      row.idx.push_back(std::stoi(cell.substr(0, colon)));
      row.val.push_back(std::stod(cell.substr(colon + 1)));
    }
    lp.rows.push_back(std::move(row));
  }
  lp.validate();
  return lp;
}

BarycentricResult barycentric_min(const std::vector<std::vector<double>>& points,
                                  const std::vector<double>& values,
                                  const std::vector<double>& query) {
  if (points.empty() || points.size() != values.size())
    throw std::invalid_argument("barycentric_min: bad input sizes");
  int d = static_cast<int>(query.size());
  LinearProgram lp;
  lp.n_vars = static_cast<int>(points.size());
  lp.objective = values;
  SparseRow mass;
  mass.rhs = 1.0;
  for (int j = 0; j < lp.n_vars; ++j) {
    mass.idx.push_back(j);
    mass.val.push_back(1.0);
  }
  lp.add_row(std::move(mass));
  for (int k = 0; k < d; ++k) {
    SparseRow row;
    row.rhs = 0.0;
    for (int j = 0; j < lp.n_vars; ++j) {
      double v = points[j].at(k) - query[k];
      if (v != 0.0) {
        row.idx.push_back(j);
        row.val.push_back(v);
      }
    }
    lp.add_row(std::move(row));
  }
  LpSolution sol = solve_lp(lp);
  BarycentricResult res;
  if (sol.status != LpStatus::optimal) return res;
  res.feasible = true;
  res.value = sol.objective_value;
  res.lambda = sol.primal;
  res.support_constant = sol.dual[0];
  res.gradient.assign(sol.dual.begin() + 1, sol.dual.end());
  res.degenerate = sol.degenerate_vertex;
  return res;
}

bool barycentric_feasible(const std::vector<std::vector<double>>& points,
                          const std::vector<double>& query, double /*tol*/) {
  std::vector<double> zeros(points.size(), 0.0);
  return barycentric_min(points, zeros, query).feasible;
}

}  // namespace mmot
