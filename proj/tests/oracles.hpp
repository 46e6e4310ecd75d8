#pragma once

// Reference implementations used only by the tests. They are deliberately
// written differently from the library code they check: dense linear
// algebra instead of power iteration, recursion instead of dynamic
// programming, nested grids instead of golden-section search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// Solves pi P = pi, sum pi = 1 by Gaussian elimination with partial pivoting.
inline std::vector<double> stationary_by_elimination(const Matrix& P) {
  const std::size_t n = P.size();
  Matrix A(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) A[i][j] = P[j][i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < n; ++j) A[n - 1][j] = 1.0;
  A[n - 1][n] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    }
    std::swap(A[col], A[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || A[r][col] == 0.0) continue;
      const double f = A[r][col] / A[col][col];
      for (std::size_t c = col; c <= n; ++c) A[r][c] -= f * A[col][c];
    }
  }
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = A[i][n] / A[i][i];
  return pi;
}

// Queue-length chain on {0..K} built by enumerating (a, s) pairs up to `cap`.
// Mass that would leave {0..K} stays put, which keeps the matrix stochastic.
inline Matrix queue_chain(const std::function<double(int)>& pa, const std::function<double(int)>& ps,
                          int K, int cap) {
  Matrix P(K + 1, std::vector<double>(K + 1, 0.0));
  for (int x = 0; x <= K; ++x) {
    double kept = 0.0;
    for (int a = 0; a <= cap; ++a) {
      const double wa = pa(a);
      if (wa == 0.0) continue;
      for (int s = 0; s <= cap; ++s) {
        const double w = wa * ps(s);
        const int next = std::max(x + a - s, 0);
        if (next <= K) {
          P[x][next] += w;
          kept += w;
        }
      }
    }
    P[x][x] += 1.0 - kept;
  }
  return P;
}

// Minimum path weight by recursion over every monotone row sequence.
// weights[column][row]; pinned fixes the first row to j and the last to l,
// otherwise rows range over [j, l]. Each path is summed from its first column
// to its last, so equal paths give bitwise equal totals.
inline double brute_min_path(const Matrix& weights, std::size_t i, std::size_t j, std::size_t k,
                             std::size_t l, bool pinned) {
  const double inf = std::numeric_limits<double>::infinity();
  std::function<double(std::size_t, std::size_t, double)> go = [&](std::size_t col, std::size_t row,
                                                                   double sum) -> double {
    sum += weights[col][row];
    if (col == k) return (!pinned || row == l) ? sum : inf;
    double best = inf;
    for (std::size_t next = row; next <= l; ++next) best = std::min(best, go(col + 1, next, sum));
    return best;
  };
  if (!pinned) {
    double best = inf;
    for (std::size_t row = j; row <= l; ++row) best = std::min(best, go(i, row, 0.0));
    return best;
  }
  return go(i, j, 0.0);
}

// Supremum of f over the open interval (lo, hi) by three rounds of nested
// grids, each 20001 points wide around the previous best point.
inline double grid_sup(const std::function<double(double)>& f, double lo, double hi) {
  double a = lo, b = hi, best_x = 0.5 * (lo + hi), best = -std::numeric_limits<double>::infinity();
  for (int round = 0; round < 3; ++round) {
    const int n = 20000;
    const double h = (b - a) / n;
    for (int i = 1; i < n; ++i) {
      const double x = a + h * i;
      const double v = f(x);
      if (v > best) {
        best = v;
        best_x = x;
      }
    }
    a = std::max(lo, best_x - 2 * h);
    b = std::min(hi, best_x + 2 * h);
  }
  return best;
}

// Ber(p)Geom(a) pmf written out directly.
inline double ber_geom_pmf(double p, double a, std::int64_t k) {
  if (k < 0) return 0.0;
  if (k == 0) return 1.0 - p;
  return p * a * std::pow(1.0 - a, static_cast<double>(k - 1));
}

}  // namespace oracle
