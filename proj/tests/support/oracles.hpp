#pragma once

// Test-side oracles, intentionally independent of the library's solve paths:
// dense vertex enumeration for small LPs, Caratheodory-style hull searches,
// and random instance generators with fixed seeds.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "mmot/lp.hpp"
#include "mmot/measures.hpp"

namespace oracle {

// Gaussian elimination with partial pivoting; returns false when singular.
inline bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b,
                        std::vector<double>& x) {
  int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-11) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return true;
}

inline int matrix_rank(std::vector<std::vector<double>> a) {
  if (a.empty()) return 0;
  int rows = static_cast<int>(a.size()), cols = static_cast<int>(a[0].size());
  int rank = 0;
  for (int col = 0; col < cols && rank < rows; ++col) {
    int piv = -1;
    for (int r = rank; r < rows; ++r)
      if (std::abs(a[r][col]) > 1e-9) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(a[piv], a[rank]);
    for (int r = 0; r < rows; ++r) {
      if (r == rank) continue;
      double f = a[r][col] / a[rank][col];
      for (int c = 0; c < cols; ++c) a[r][c] -= f * a[rank][c];
    }
    ++rank;
  }
  return rank;
}

// Exhaustive vertex enumeration over column subsets of size rank(A): the
// brute-force optimum of min c.x, Ax = b, x >= 0.
inline std::optional<double> enumerate_lp_optimum(const mmot::LinearProgram& lp) {
  int n = lp.n_vars, m = static_cast<int>(lp.rows.size());
  std::vector<std::vector<double>> dense(m, std::vector<double>(n, 0.0));
  std::vector<double> rhs(m);
  for (int r = 0; r < m; ++r) {
    rhs[r] = lp.rows[r].rhs;
    for (std::size_t k = 0; k < lp.rows[r].idx.size(); ++k)
      dense[r][lp.rows[r].idx[k]] = lp.rows[r].val[k];
  }
  int rank = matrix_rank(dense);
  std::optional<double> best;
  std::vector<int> subset(rank);
  std::vector<char> take(n, 0);
  std::fill(take.begin(), take.begin() + rank, 1);
  std::sort(take.begin(), take.end());  // lexicographic combinations via next_permutation
  do {
    int at = 0;
    for (int j = 0; j < n; ++j)
      if (take[j]) subset[at++] = j;
    // Square system on an independent row subset: use all rows via normal
    // equations only if rank == m; otherwise pick rank independent rows.
    std::vector<std::vector<double>> cols(m, std::vector<double>(rank));
    for (int r = 0; r < m; ++r)
      for (int k = 0; k < rank; ++k) cols[r][k] = dense[r][subset[k]];
    // Select `rank` independent rows greedily.
    std::vector<int> rows_pick;
    {
      std::vector<std::vector<double>> acc;
      for (int r = 0; r < m && static_cast<int>(rows_pick.size()) < rank; ++r) {
        acc.push_back(cols[r]);
        if (matrix_rank(acc) == static_cast<int>(rows_pick.size()) + 1) rows_pick.push_back(r);
        else acc.pop_back();
      }
    }
    if (static_cast<int>(rows_pick.size()) < rank) continue;
    std::vector<std::vector<double>> sq(rank, std::vector<double>(rank));
    std::vector<double> sb(rank);
    for (int k = 0; k < rank; ++k) {
      for (int c = 0; c < rank; ++c) sq[k][c] = cols[rows_pick[k]][c];
      sb[k] = rhs[rows_pick[k]];
    }
    std::vector<double> xs;
    if (!solve_dense(sq, sb, xs)) continue;
    bool ok = true;
    for (double v : xs)
      if (v < -1e-9) ok = false;
    if (!ok) continue;
    std::vector<double> full(n, 0.0);
    for (int k = 0; k < rank; ++k) full[subset[k]] = std::max(xs[k], 0.0);
    for (int r = 0; r < m && ok; ++r) {
      double lhs = 0.0;
      for (int j = 0; j < n; ++j) lhs += dense[r][j] * full[j];
      if (std::abs(lhs - rhs[r]) > 1e-8) ok = false;
    }
    if (!ok) continue;
    double value = 0.0;
    for (int j = 0; j < n; ++j) value += lp.objective[j] * full[j];
    if (!best || value < *best) best = value;
  } while (std::next_permutation(take.begin(), take.end()));
  return best;
}

// Caratheodory-style brute force: p is non-extreme iff some subset of the
// other points of size <= d + 1 contains it in its convex hull.
inline bool hull_contains(const std::vector<mmot::GridPoint>& pts, const mmot::GridPoint& p,
                          int max_support) {
  int n = static_cast<int>(pts.size());
  int d = static_cast<int>(p.size());
  std::vector<int> subset;
  std::function<bool(int, int)> rec = [&](int start, int remaining) -> bool {
    if (!subset.empty()) {
      // Solve sum lambda q = p, sum lambda = 1 in least-squares-free exact
      // form: square system of size subset.size() via the affine system.
      int k = static_cast<int>(subset.size());
      std::vector<std::vector<double>> a(d + 1, std::vector<double>(k));
      std::vector<double> b(d + 1);
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < k; ++c) a[r][c] = pts[subset[c]][r];
        b[r] = p[r];
      }
      for (int c = 0; c < k; ++c) a[d][c] = 1.0;
      b[d] = 1.0;
      // Normal equations A^T A x = A^T b for the k-variable system.
      std::vector<std::vector<double>> ata(k, std::vector<double>(k, 0.0));
      std::vector<double> atb(k, 0.0);
      for (int r = 0; r < d + 1; ++r)
        for (int c1 = 0; c1 < k; ++c1) {
          atb[c1] += a[r][c1] * b[r];
          for (int c2 = 0; c2 < k; ++c2) ata[c1][c2] += a[r][c1] * a[r][c2];
        }
      std::vector<double> lambda;
      if (solve_dense(ata, atb, lambda)) {
        bool ok = true;
        for (double l : lambda)
          if (l < -1e-9) ok = false;
        if (ok) {
          for (int r = 0; r < d && ok; ++r) {
            double s = 0.0;
            for (int c = 0; c < k; ++c) s += lambda[c] * pts[subset[c]][r];
            if (std::abs(s - p[r]) > 1e-8) ok = false;
          }
          double mass = 0.0;
          for (double l : lambda) mass += l;
          if (ok && std::abs(mass - 1.0) <= 1e-8) return true;
        }
      }
    }
    if (remaining == 0) return false;
    for (int j = start; j < n; ++j) {
      subset.push_back(j);
      if (rec(j + 1, remaining - 1)) return true;
      subset.pop_back();
    }
    return false;
  };
  return rec(0, max_support);
}

// Random atomic measures and convex-ordered pairs; the splits are
// mean-preserving so the order holds by construction.
inline mmot::DiscreteMeasure random_measure(std::mt19937& rng, int n_atoms, double spread = 2.0) {
  std::uniform_real_distribution<double> pos(-spread, spread);
  std::uniform_real_distribution<double> wgt(0.1, 1.0);
  std::vector<mmot::Atom> atoms;
  for (int i = 0; i < n_atoms; ++i) atoms.push_back({pos(rng), wgt(rng)});
  mmot::DiscreteMeasure m(atoms);
  return m.scaled(1.0 / m.mass());
}

inline std::pair<mmot::DiscreteMeasure, mmot::DiscreteMeasure> random_convex_ordered_pair(
    std::mt19937& rng, int n_atoms) {
  mmot::DiscreteMeasure mu = random_measure(rng, n_atoms);
  std::uniform_real_distribution<double> delta(0.05, 0.8);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<mmot::Atom> split;
  for (const mmot::Atom& a : mu.atoms()) {
    if (coin(rng) < 0.3) {
      split.push_back(a);  // part of nu keeps the atom in place
      continue;
    }
    double dl = delta(rng), dr = delta(rng);
    // Masses chosen so the barycenter stays at the atom.
    double wl = a.weight * dr / (dl + dr);
    double wr = a.weight * dl / (dl + dr);
    split.push_back({a.position - dl, wl});
    split.push_back({a.position + dr, wr});
  }
  return {mu, mmot::DiscreteMeasure(split)};
}

}  // namespace oracle
