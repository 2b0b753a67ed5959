#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tsfd {

struct AssignmentResult {
  std::vector<int> col_of_row;
  double value = 0.0;
};

// Max-weight perfect assignment on a dense square matrix, Kuhn-Munkres with
// potentials and shortest augmenting paths, O(n^3). Deterministic for a given
// input.
inline AssignmentResult max_weight_assignment(const std::vector<std::vector<double>>& weight) {
  const int n = static_cast<int>(weight.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
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
    } while (j0);
  }
  AssignmentResult res;
  res.col_of_row.assign(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j]) res.col_of_row[p[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) res.value += weight[i][res.col_of_row[i]];
  return res;
}

// Kuhn augmenting-path maximum matching on a bipartite boolean graph given as
// adjacency lists (left vertex -> right vertices, ascending). match_of_right
// may carry a partial matching on entry. Returns the matching size.
inline int kuhn_max_matching(const std::vector<std::vector<int>>& adj, int n_right,
                             std::vector<int>& match_of_right) {
  const int n_left = static_cast<int>(adj.size());
  match_of_right.assign(n_right, -1);
  std::vector<int> match_of_left(n_left, -1);
  std::vector<char> visited(n_right, 0);

  auto try_augment = [&](auto&& self, int left) -> bool {
    for (int right : adj[left]) {
      if (visited[right]) continue;
      visited[right] = 1;
      if (match_of_right[right] == -1 || self(self, match_of_right[right])) {
        match_of_right[right] = left;
        match_of_left[left] = right;
        return true;
      }
    }
    return false;
  };

  int size = 0;
  for (int left = 0; left < n_left; ++left) {
    std::fill(visited.begin(), visited.end(), 0);
    if (try_augment(try_augment, left)) ++size;
  }
  return size;
}

}  // namespace tsfd
