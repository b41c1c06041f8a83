// Copyright 2026 The stgeval Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Maximum-benefit bipartite assignment (Hungarian method) over dense
// rectangular benefit matrices.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "stg/errors.hpp"

namespace stg {

template <typename Scalar>
using ScoreMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct Matching {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;  // (row, col), ascending row
  Scalar total_score{0};
};

namespace detail {

template <typename Derived>
void check_finite(const Eigen::MatrixBase<Derived>& m) {
  if (!m.allFinite()) throw InputError("score matrix has a non-finite entry");
}

// Shortest-augmenting-path Hungarian method on a square cost matrix.
// Returns row -> column and leaves the optimal dual potentials in u, v so
// that cost(i, j) - u[i] - v[j] >= 0 with equality on the returned pairs.
template <typename Scalar>
std::vector<Eigen::Index> min_cost_square(const ScoreMatrix<Scalar>& cost,
                                          std::vector<Scalar>& u, std::vector<Scalar>& v) {
  const Eigen::Index n = cost.rows();
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  u.assign(n + 1, Scalar(0));
  v.assign(n + 1, Scalar(0));
  // 1-based: p[j] is the row matched to column j, column 0 is the virtual root.
  std::vector<Eigen::Index> p(n + 1, 0), way(n + 1, 0);
  std::vector<Scalar> minv(n + 1);
  std::vector<char> used(n + 1);
  for (Eigen::Index i = 1; i <= n; ++i) {
    p[0] = i;
    Eigen::Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Eigen::Index i0 = p[j0];
      Scalar delta = inf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Scalar cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= n; ++j) {
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
      const Eigen::Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Eigen::Index> row_to_col(n);
  for (Eigen::Index j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  // Shift to 0-based potentials.
  u.erase(u.begin());
  v.erase(v.begin());
  return row_to_col;
}

// Every perfect matching that uses only tight edges (zero reduced cost
// under optimal duals) is optimal. Starting from one such matching, walk
// rows in order and move each to its smallest tight column reachable by an
// alternating cycle through later rows. The result is the lexicographically
// smallest optimal row -> column assignment.
template <typename Scalar>
void lexicographic_refine(const ScoreMatrix<Scalar>& cost, const std::vector<Scalar>& u,
                          const std::vector<Scalar>& v, std::vector<Eigen::Index>& row_to_col) {
  const Eigen::Index n = cost.rows();
  if (n == 0) return;
  const Scalar scale = std::max<Scalar>(Scalar(1), cost.cwiseAbs().maxCoeff());
  const Scalar eps = Scalar(1e-10) * scale;
  auto tight = [&](Eigen::Index i, Eigen::Index j) {
    return cost(i, j) - u[i] - v[j] <= eps;
  };
  std::vector<Eigen::Index> col_to_row(n);
  for (Eigen::Index i = 0; i < n; ++i) col_to_row[row_to_col[i]] = i;

  std::vector<char> seen_row(n);
  std::vector<Eigen::Index> parent_col(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < row_to_col[i]; ++j) {
      if (!tight(i, j)) continue;
      const Eigen::Index owner = col_to_row[j];
      if (owner < i) continue;  // fixed by an earlier row
      // Find an alternating path from `owner` to the column row i releases,
      // visiting only rows after i.
      const Eigen::Index target = row_to_col[i];
      std::fill(seen_row.begin(), seen_row.end(), 0);
      std::vector<std::pair<Eigen::Index, Eigen::Index>> path;  // (row, new col)
      std::function<bool(Eigen::Index)> dfs = [&](Eigen::Index r) -> bool {
        seen_row[r] = 1;
        for (Eigen::Index c = 0; c < n; ++c) {
          if (c == j || !tight(r, c)) continue;
          if (c == target) {
            path.emplace_back(r, c);
            return true;
          }
          const Eigen::Index next = col_to_row[c];
          if (next <= i || seen_row[next]) continue;
          if (dfs(next)) {
            path.emplace_back(r, c);
            return true;
          }
        }
        return false;
      };
      if (!dfs(owner)) continue;
      path.emplace_back(i, j);
      for (const auto& [r, c] : path) {
        row_to_col[r] = c;
        col_to_row[c] = r;
      }
      break;
    }
  }
}

}  // namespace detail

/// Maximum-total one-to-one matching of rows to columns. Rows and columns
/// may stay unmatched; pairs with zero benefit may appear in the result and
/// are equivalent to leaving both sides unmatched. Among optimal matchings
/// the lexicographically smallest row -> column assignment is returned
/// (unmatched sorts after every real column). Throws InputError on a
/// non-finite entry.
template <typename Derived>
Matching<typename Derived::Scalar> solve_max_assignment(const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  detail::check_finite(scores);
  const Eigen::Index rows = scores.rows();
  const Eigen::Index cols = scores.cols();
  Matching<Scalar> result;
  if (rows == 0 || cols == 0) return result;

  // Padding with zero-benefit dummies turns "leave unmatched" into a
  // regular assignment. Non-negative inputs never prefer an unmatched item
  // over a real pair, so a max(rows, cols) square suffices; otherwise every
  // item needs its own dummy partner.
  const bool nonneg = scores.minCoeff() >= Scalar(0);
  const Eigen::Index n = nonneg ? std::max(rows, cols) : rows + cols;
  ScoreMatrix<Scalar> cost = ScoreMatrix<Scalar>::Zero(n, n);
  cost.topLeftCorner(rows, cols) = -scores.derived();

  std::vector<Scalar> u, v;
  auto row_to_col = detail::min_cost_square<Scalar>(cost, u, v);
  detail::lexicographic_refine<Scalar>(cost, u, v, row_to_col);

  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::Index j = row_to_col[i];
    if (j < cols) {
      result.pairs.emplace_back(i, j);
      result.total_score += scores(i, j);
    }
  }
  return result;
}

/// Exhaustive maximum over all partial one-to-one matchings; test oracle.
/// Requires min(rows, cols) <= 8 and at most ~5e7 candidate matchings,
/// otherwise throws InputError.
template <typename Derived>
Matching<typename Derived::Scalar> brute_force_assignment(const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  detail::check_finite(scores);
  const bool transposed = scores.rows() > scores.cols();
  const ScoreMatrix<Scalar> m =
      transposed ? ScoreMatrix<Scalar>(scores.transpose()) : ScoreMatrix<Scalar>(scores);
  const Eigen::Index small = m.rows();
  const Eigen::Index large = m.cols();
  if (small > 8) throw InputError("brute_force_assignment: min(rows, cols) exceeds 8");
  double work = 1;
  for (Eigen::Index k = 0; k < small; ++k) work *= static_cast<double>(large - k + 1);
  if (work > 5e7) throw InputError("brute_force_assignment: too many candidate matchings");

  Matching<Scalar> best;
  if (small == 0 || large == 0) return best;
  bool have_best = false;
  std::vector<Eigen::Index> choice(small, -1);
  std::vector<char> taken(large, 0);
  std::function<void(Eigen::Index, Scalar)> rec = [&](Eigen::Index r, Scalar total) {
    if (r == small) {
      if (!have_best || total > best.total_score) {
        have_best = true;
        best.total_score = total;
        best.pairs.clear();
        for (Eigen::Index i = 0; i < small; ++i) {
          if (choice[i] < 0) continue;
          if (transposed) {
            best.pairs.emplace_back(choice[i], i);
          } else {
            best.pairs.emplace_back(i, choice[i]);
          }
        }
      }
      return;
    }
    for (Eigen::Index c = 0; c < large; ++c) {
      if (taken[c]) continue;
      taken[c] = 1;
      choice[r] = c;
      rec(r + 1, total + m(r, c));
      taken[c] = 0;
    }
    choice[r] = -1;
    rec(r + 1, total);
  };
  rec(0, Scalar(0));
  std::sort(best.pairs.begin(), best.pairs.end());
  return best;
}

}  // namespace stg
