// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <vector>

namespace sreid {

/// Kuhn-Munkres with potentials on a square cost matrix (minimization).
/// Returns row -> column. O(n^3); the matrices here stay tiny.
inline std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

/// Maximum-total-score partial matching over an r x c score matrix, where
/// pairs scoring below `min_score` are unmatchable. Returns (row, col) pairs.
///
/// Implemented as min-cost perfect matching on a padded square matrix where
/// ineligible and dummy cells cost 0 and eligible cells cost -score; any
/// assignment landing on a 0-cost cell is equivalent to leaving both sides
/// unmatched and is filtered out afterwards.
inline std::vector<std::pair<std::size_t, std::size_t>> max_score_matching(
    const std::vector<std::vector<double>>& score, double min_score) {
    const std::size_t rows = score.size();
    const std::size_t cols = rows == 0 ? 0 : score[0].size();
    const std::size_t n = std::max(rows, cols);
    if (n == 0) return {};
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            if (score[i][j] >= min_score) cost[i][j] = -score[i][j];
    const auto row_to_col = solve_assignment(cost);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < rows; ++i) {
        const int j = row_to_col[i];
        if (j < 0 || static_cast<std::size_t>(j) >= cols) continue;
        if (score[i][static_cast<std::size_t>(j)] >= min_score)
            out.emplace_back(i, static_cast<std::size_t>(j));
    }
    return out;
}

}  // namespace sreid
