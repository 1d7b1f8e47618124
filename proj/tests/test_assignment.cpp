#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <numeric>

#include "sreid/assignment.hpp"
#include "sreid/rng.hpp"

using namespace sreid;

namespace {

// Exhaustive best partial matching by total score, for cross-checking.
double brute_force_best(const std::vector<std::vector<double>>& score, double min_score) {
    const std::size_t rows = score.size();
    const std::size_t cols = rows == 0 ? 0 : score[0].size();
    double best = 0.0;
    std::vector<int> used(cols, 0);
    std::function<void(std::size_t, double)> rec = [&](std::size_t r, double acc) {
        best = std::max(best, acc);
        if (r == rows) return;
        rec(r + 1, acc);  // leave row r unmatched
        for (std::size_t c = 0; c < cols; ++c) {
            if (used[c] || score[r][c] < min_score) continue;
            used[c] = 1;
            rec(r + 1, acc + score[r][c]);
            used[c] = 0;
        }
    };
    rec(0, 0.0);
    return best;
}

}  // namespace

TEST_CASE("solver beats greedy on the classic 2x2 trap") {
    // Greedy picks 0.9 first and is stuck with 0.3 (total 1.2);
    // optimal pairing is 0.8 + 0.5 = 1.3.
    const std::vector<std::vector<double>> score = {{0.9, 0.8}, {0.5, 0.3}};
    const auto pairs = max_score_matching(score, 0.1);
    double total = 0.0;
    for (const auto& [r, c] : pairs) total += score[r][c];
    CHECK(total == Catch::Approx(1.3));
}

TEST_CASE("pairs below the floor are never matched") {
    const std::vector<std::vector<double>> score = {{0.4, 0.2}, {0.1, 0.45}};
    const auto pairs = max_score_matching(score, 0.5);
    CHECK(pairs.empty());
}

TEST_CASE("rectangular inputs and empty inputs are handled") {
    CHECK(max_score_matching({}, 0.5).empty());
    const std::vector<std::vector<double>> wide = {{0.9, 0.7, 0.8}};
    const auto pairs = max_score_matching(wide, 0.5);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].second == 0);
}

TEST_CASE("matching total equals exhaustive enumeration") {
    Rng rng(13);
    for (int trial = 0; trial < 400; ++trial) {
        const auto rows = static_cast<std::size_t>(rng.uniform_int(0, 5));
        const auto cols = static_cast<std::size_t>(rng.uniform_int(0, 5));
        std::vector<std::vector<double>> score(rows, std::vector<double>(cols, 0.0));
        for (auto& row : score)
            for (auto& v : row) v = rng.uniform();
        const double floor = rng.uniform(0.0, 0.8);
        const auto pairs = max_score_matching(score, floor);
        double total = 0.0;
        std::vector<int> used_r(rows, 0), used_c(cols, 0);
        for (const auto& [r, c] : pairs) {
            CHECK(score[r][c] >= floor);
            CHECK(!used_r[r]);
            CHECK(!used_c[c]);
            used_r[r] = used_c[c] = 1;
            total += score[r][c];
        }
        CHECK(total == Catch::Approx(brute_force_best(score, floor)).margin(1e-9));
    }
}
