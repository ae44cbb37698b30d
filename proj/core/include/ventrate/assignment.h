// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef VENTRATE_ASSIGNMENT_H_
#define VENTRATE_ASSIGNMENT_H_

#include <utility>
#include <vector>

#include <Eigen/Core>

namespace ventrate {

struct Assignment {
  // (row, col) pairs sorted by row.
  std::vector<std::pair<int, int>> matches;
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
};

// Minimum-cost perfect matching of every row of a rows <= cols matrix.
// Returns the column assigned to each row. O(rows^2 * cols).
std::vector<int> SolveDenseAssignment(const Eigen::MatrixXd& cost);

// Optimal partial assignment. Minimizes
//   sum(matched cost) + (unmatched rows + unmatched cols) * cost_limit / 2,
// so a pair is only worth matching when its cost is at most `cost_limit`.
// Entries above the limit (or non-finite) are never matched. The problem is
// split into connected components of feasible entries before solving, so
// sparse problems stay cheap.
Assignment SolveAssignment(const Eigen::MatrixXd& cost, double cost_limit);

}  // namespace ventrate

#endif  // VENTRATE_ASSIGNMENT_H_
