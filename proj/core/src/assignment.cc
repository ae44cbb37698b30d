// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ventrate/assignment.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ventrate {

std::vector<int> SolveDenseAssignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  if (n > m) throw std::invalid_argument("assignment needs rows <= cols");
  if (n == 0) return {};

  // Shortest augmenting paths with row/column potentials (1-based).
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  std::vector<double> minv(m + 1);
  std::vector<char> used(m + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int Find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void Union(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

// Solves one connected component via the square extension used by lapjv's
// cost_limit option: dummy rows/columns cost limit/2, dummy-dummy costs 0.
void SolveComponent(const Eigen::MatrixXd& cost, double cost_limit,
                    const std::vector<int>& rows, const std::vector<int>& cols,
                    std::vector<std::pair<int, int>>& matches) {
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(cols.size());
  if (r == 1 && c == 1) {
    const double x = cost(rows[0], cols[0]);
    if (std::isfinite(x) && x <= cost_limit) matches.emplace_back(rows[0], cols[0]);
    return;
  }
  double max_abs = std::abs(cost_limit);
  for (int i : rows) {
    for (int j : cols) {
      const double x = cost(i, j);
      if (std::isfinite(x) && x <= cost_limit) max_abs = std::max(max_abs, std::abs(x));
    }
  }
  const double forbidden = 4.0 * (max_abs + 1.0) * (r + c);
  const int size = r + c;
  Eigen::MatrixXd ext = Eigen::MatrixXd::Constant(size, size, cost_limit / 2.0);
  ext.bottomRightCorner(c, r).setZero();
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < c; ++b) {
      const double x = cost(rows[a], cols[b]);
      ext(a, b) = (std::isfinite(x) && x <= cost_limit) ? x : forbidden;
    }
  }
  const std::vector<int> assigned = SolveDenseAssignment(ext);
  for (int a = 0; a < r; ++a) {
    const int b = assigned[a];
    if (b < c) {
      const double x = cost(rows[a], cols[b]);
      if (std::isfinite(x) && x <= cost_limit) matches.emplace_back(rows[a], cols[b]);
    }
  }
}

}  // namespace

Assignment SolveAssignment(const Eigen::MatrixXd& cost, double cost_limit) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  Assignment result;

  // Rows are nodes [0, n), columns are [n, n + m).
  DisjointSets sets(n + m);
  std::vector<char> row_has_edge(n, 0), col_has_edge(m, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double x = cost(i, j);
      if (std::isfinite(x) && x <= cost_limit) {
        sets.Union(i, n + j);
        row_has_edge[i] = 1;
        col_has_edge[j] = 1;
      }
    }
  }

  std::vector<std::vector<int>> comp_rows(n + m), comp_cols(n + m);
  for (int i = 0; i < n; ++i) {
    if (row_has_edge[i]) comp_rows[sets.Find(i)].push_back(i);
  }
  for (int j = 0; j < m; ++j) {
    if (col_has_edge[j]) comp_cols[sets.Find(n + j)].push_back(j);
  }
  for (int root = 0; root < n + m; ++root) {
    if (comp_rows[root].empty()) continue;
    SolveComponent(cost, cost_limit, comp_rows[root], comp_cols[root],
                   result.matches);
  }

  std::sort(result.matches.begin(), result.matches.end());
  std::vector<char> row_matched(n, 0), col_matched(m, 0);
  for (const auto& [i, j] : result.matches) {
    row_matched[i] = 1;
    col_matched[j] = 1;
  }
  for (int i = 0; i < n; ++i) {
    if (!row_matched[i]) result.unmatched_rows.push_back(i);
  }
  for (int j = 0; j < m; ++j) {
    if (!col_matched[j]) result.unmatched_cols.push_back(j);
  }
  return result;
}

}  // namespace ventrate
