#pragma once

#include <Eigen/Core>

#include <limits>
#include <vector>

namespace infraqa {

struct Assignment {
  std::vector<int> row_to_col;  // -1 for unassigned rows
  double total_cost = 0.0;
};

/// Minimum-cost one-to-one assignment for an n x m cost matrix (Kuhn-Munkres
/// with potentials, O(n^2 m)). min(n, m) pairs are always assigned. The scan
/// order is fixed, so equal inputs give equal outputs; among equal-cost
/// candidates the lower column index is taken first.
template <typename Derived>
Assignment optimal_assignment(const Eigen::MatrixBase<Derived>& cost_in) {
  const Eigen::MatrixXd cost = cost_in.template cast<double>();
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  Assignment result;
  result.row_to_col.assign(rows, -1);
  if (rows == 0 || cols == 0) return result;

  const bool transposed = rows > cols;
  const Eigen::MatrixXd a = transposed ? Eigen::MatrixXd(cost.transpose()) : cost;
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  constexpr double inf = std::numeric_limits<double>::infinity();

  // 1-based arrays; index 0 is the virtual root.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
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

  for (int j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    const int r = p[j] - 1;
    const int c = j - 1;
    if (transposed) {
      result.row_to_col[c] = r;
    } else {
      result.row_to_col[r] = c;
    }
  }
  for (int r = 0; r < rows; ++r)
    if (result.row_to_col[r] >= 0) result.total_cost += cost(r, result.row_to_col[r]);
  return result;
}

}  // namespace infraqa
