#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "signdim/error.hpp"
#include "signdim/rank_one.hpp"
#include "signdim/sc_bound.hpp"

using namespace signdim;

namespace {

// Rows 0 and 1 share an unknown third entry.
PartialSignMatrix shared_unknown() {
    return PartialSignMatrix::from_dense({{1, 1, 0, 1}, {1, 1, 0, -1}, {-1, -1, -1, 1}});
}

int disagreements(const ForestState& s, std::size_t u, std::size_t v) {
    int n = 0;
    for (std::size_t j = 0; j < s.n_cols(); ++j)
        n += s.cell(u, j) != 0 && s.cell(v, j) != 0 && s.cell(u, j) != s.cell(v, j);
    return n;
}

}  // namespace

TEST(EdgeWeight, CaseOneExample) {
    const ForestState s(PartialSignMatrix::from_dense({{1, 1, 0, 1}, {-1, 1, -1, -1}}));
    EXPECT_EQ(edge_weight(0, 1, s), 2u);
}

TEST(EdgeWeight, CaseTwoExample) {
    const ForestState s(PartialSignMatrix::from_dense({{1, 1, 0, 1}, {1, -1, 0, 1}}));
    EXPECT_EQ(edge_weight(0, 1, s), 1u);
}

TEST(EdgeWeight, IdenticalRowsAreZero) {
    const ForestState s(PartialSignMatrix::from_dense({{1, -1, 1}, {1, -1, 1}}));
    EXPECT_EQ(edge_weight(0, 1, s), 0u);
    EXPECT_EQ(edge_weight(1, 0, s), 0u);
}

TEST(Update, SharedUnknownStepOneAddsEquivalence) {
    ForestState s(shared_unknown());
    update({0, 1}, s);
    EXPECT_TRUE(s.cells_equivalent(2, 0, 1));
    EXPECT_EQ(s.cell(0, 2), 0);
    EXPECT_EQ(s.cell(1, 2), 0);
    EXPECT_EQ(s.forest_edges(), (std::vector<RowEdge>{{0, 1}}));
}

TEST(Update, SharedUnknownStepTwoFillsTheClass) {
    ForestState s(shared_unknown());
    update({0, 1}, s);
    update({0, 2}, s);
    EXPECT_EQ(s.cell(0, 2), -1);
    EXPECT_EQ(s.cell(1, 2), -1);
    EXPECT_EQ(s.n_unknown(), 0u);
    const std::set<std::size_t> rows(s.pending_rows().begin(), s.pending_rows().end());
    EXPECT_EQ(rows, (std::set<std::size_t>{0, 1}));
    EXPECT_EQ(s.pending_cols(), (std::vector<std::size_t>{2}));
}

TEST(Update, KnownRowsOnlyTouchForest) {
    ForestState s(PartialSignMatrix::from_dense({{1, -1}, {-1, -1}, {1, 1}}));
    update({1, 2}, s);
    EXPECT_EQ(s.cell(1, 0), -1);
    EXPECT_EQ(s.cell(2, 1), 1);
    EXPECT_EQ(s.weight(1, 2), 2u);
    EXPECT_TRUE(s.in_same_tree(1, 2));
    EXPECT_FALSE(s.in_same_tree(0, 2));
    EXPECT_TRUE(s.pending_rows().empty());
}

TEST(Update, CycleIsRejected) {
    ForestState s(PartialSignMatrix::from_dense({{1}, {1}, {1}}));
    update({0, 1}, s);
    update({1, 2}, s);
    try {
        update({0, 2}, s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PrecondViolated);
    }
}

TEST(Update, WeightsTrackWorkingMatrixUnderRandomEdges) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 3 + trial % 6;
        const auto m = *prune(oracle::random_partial(n, 2 + trial % 5, 0.4, rng, true), 0);
        ForestState s(m);
        std::vector<std::size_t> order(m.n_rows());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<int> before(m.n_rows() * m.n_cols());
        for (std::size_t k = 1; k < order.size(); ++k) {
            for (std::size_t i = 0; i < m.n_rows(); ++i)
                for (std::size_t j = 0; j < m.n_cols(); ++j) before[i * m.n_cols() + j] = s.cell(i, j);
            std::uniform_int_distribution<std::size_t> pick(0, k - 1);
            update({order[pick(rng)], order[k]}, s);
            for (std::size_t i = 0; i < m.n_rows(); ++i)
                for (std::size_t j = 0; j < m.n_cols(); ++j) {
                    const int b = before[i * m.n_cols() + j];
                    if (b != 0) ASSERT_EQ(s.cell(i, j), b);
                }
            for (std::size_t u = 0; u < m.n_rows(); ++u)
                for (std::size_t v = u + 1; v < m.n_rows(); ++v)
                    ASSERT_EQ(static_cast<int>(s.weight(u, v)), disagreements(s, u, v));
        }
        for (const Entry& e : m.entries()) EXPECT_EQ(s.cell(e.row, e.col), to_int(e.sign));
    }
}

TEST(SpanningTree, TwoRowsFillFromEachOther) {
    const auto t = build_spanning_tree(PartialSignMatrix::from_dense({{1, 0, -1}, {0, -1, 1}}), 0);
    EXPECT_EQ(t.forest, (std::vector<RowEdge>{{0, 1}}));
    EXPECT_EQ(t.completion.to_rows(), (std::vector<std::vector<int>>{{1, -1, -1}, {1, -1, 1}}));
}

TEST(SpanningTree, SharedUnknown) {
    const auto t = build_spanning_tree(shared_unknown(), 0);
    EXPECT_EQ(t.forest, (std::vector<RowEdge>{{0, 1}, {0, 2}}));
    EXPECT_EQ(t.completion.to_rows(),
              (std::vector<std::vector<int>>{{1, 1, -1, 1}, {1, 1, -1, -1}, {-1, -1, -1, 1}}));
}

TEST(SpanningTree, FullyObservedCompletionIsInput) {
    std::mt19937_64 rng(8);
    const auto m = oracle::random_partial(6, 5, 1.0, rng);
    EXPECT_EQ(build_spanning_tree(m, 3).completion.to_rows(), m.to_dense());
}

TEST(SpanningTree, RequiresPrunedInput) {
    try {
        build_spanning_tree(PartialSignMatrix::from_dense({{1, 0}, {1, 0}}), 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PrecondViolated);
    }
}

TEST(SpanningTree, GreedyPicksMinimumCycleFreeEdges) {
    // Fully observed input keeps weights static, so the result must be a
    // minimum spanning tree.
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const auto m = oracle::random_partial(6, 6, 1.0, rng);
        const auto t = build_spanning_tree(m, static_cast<std::uint64_t>(trial));
        const auto rows = m.to_dense();
        auto w = [&](std::size_t u, std::size_t v) {
            int d = 0;
            for (std::size_t j = 0; j < rows[u].size(); ++j) d += rows[u][j] != rows[v][j];
            return d;
        };
        int total = 0;
        for (const auto& [u, v] : t.forest) total += w(u, v);
        // Prim's algorithm as the reference.
        std::vector<bool> in(6, false);
        in[0] = true;
        int best_total = 0;
        for (int k = 1; k < 6; ++k) {
            int best = 1 << 20;
            std::size_t pick = 0;
            for (std::size_t u = 0; u < 6; ++u)
                for (std::size_t v = 0; v < 6; ++v)
                    if (in[u] && !in[v] && w(u, v) < best) {
                        best = w(u, v);
                        pick = v;
                    }
            in[pick] = true;
            best_total += best;
        }
        EXPECT_EQ(total, best_total);
    }
}

TEST(WalkPermutation, Path) {
    EXPECT_EQ(walk_permutation({{0, 1}, {1, 2}}, 3, 0), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(WalkPermutation, StarFromLeaf) {
    const auto p = walk_permutation({{0, 1}, {0, 2}}, 3, 1);
    EXPECT_EQ(p, (std::vector<std::size_t>{1, 0, 2}));
}

TEST(WalkPermutation, ShuffledStillPermutation) {
    std::vector<RowEdge> star;
    for (std::size_t k = 1; k < 9; ++k) star.push_back({0, k});
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto p = walk_permutation(star, 9, 4, seed);
        EXPECT_EQ(p.front(), 4u);
        EXPECT_EQ(p[1], 0u);
        std::sort(p.begin(), p.end());
        for (std::size_t k = 0; k < 9; ++k) EXPECT_EQ(p[k], k);
    }
}

TEST(WalkPermutation, SharedUnknownLeaf) {
    auto p = walk_permutation(build_spanning_tree(shared_unknown(), 0).forest, 3, 2);
    std::sort(p.begin(), p.end());
    EXPECT_EQ(p, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(WalkPermutation, NonSpanningForestThrows) {
    EXPECT_THROW(walk_permutation({{0, 1}}, 3, 0), Error);
}

TEST(SignChanges, SingleColumn) {
    EXPECT_EQ(sign_changes(DenseSignMatrix::from_rows({{1}, {1}, {-1}, {1}}), {0, 1, 2, 3}), 2);
}

TEST(SignChanges, AllUpIsZero) {
    EXPECT_EQ(sign_changes(DenseSignMatrix::from_rows({{1, 1}, {1, 1}, {1, 1}}), {2, 0, 1}), 0);
}

TEST(SignChanges, IdentityFamilyThree) {
    EXPECT_EQ(sign_changes(DenseSignMatrix::from_rows(oracle::identity_family(3)), {0, 1, 2}), 2);
}

TEST(Bound, AllUpIsOne) {
    const auto r = estimate_dimension_upper_bound(PartialSignMatrix::from_dense({{1, 1}, {1, 1}}), {});
    EXPECT_EQ(r.r_hat, 1);
}

TEST(Bound, IdentityFamilyIsThree) {
    for (std::size_t n = 3; n <= 8; ++n) {
        const auto rows = oracle::identity_family(n);
        EXPECT_EQ(oracle::sc_star(rows), 2) << n;
        EXPECT_EQ(estimate_dimension_upper_bound(PartialSignMatrix::from_dense(rows), {}).r_hat, 3) << n;
    }
}

TEST(Bound, SingleDownIsTwo) {
    const auto rows = std::vector<std::vector<int>>{{1, 1, 1}, {1, -1, 1}, {1, 1, 1}};
    EXPECT_EQ(oracle::sc_star(rows), 1);
    EXPECT_EQ(estimate_dimension_upper_bound(PartialSignMatrix::from_dense(rows), {}).r_hat, 2);
}

TEST(Bound, ResultInvariants) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 80; ++trial) {
        const auto m = *prune(oracle::random_partial(3 + trial % 9, 2 + trial % 7, 0.35, rng, true), 0);
        BoundConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(trial);
        const auto r = estimate_dimension_upper_bound(m, cfg);
        const PartialSignMatrix view = r.orientation == Orientation::AsGiven ? m : transpose(m);
        const auto rows = r.completion.to_rows();
        for (const Entry& e : view.entries()) ASSERT_EQ(rows[e.row][e.col], to_int(e.sign));
        ASSERT_EQ(r.r_hat, oracle::sign_changes(rows, r.permutation) + 1);
        ASSERT_EQ(r.sc_value + 1, r.r_hat);
        auto sorted = r.permutation;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t k = 0; k < sorted.size(); ++k) ASSERT_EQ(sorted[k], k);
        EXPECT_EQ(view.n_rows(), rows.size());

        const auto given = estimate_single_orientation(m, cfg, Orientation::AsGiven);
        const auto flipped = estimate_single_orientation(m, cfg, Orientation::Transposed);
        EXPECT_EQ(r.r_hat, std::min(given.r_hat, flipped.r_hat));
    }
}

TEST(Bound, NeverBelowRankOneVerdict) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = *prune(oracle::random_partial(2 + trial % 5, 2 + trial % 4, 0.6, rng, true), 0);
        const int r_hat = estimate_dimension_upper_bound(m, {}).r_hat;
        if (!oracle::rank_one_by_enumeration(m)) ASSERT_GE(r_hat, 2);
        if (r_hat == 1) ASSERT_TRUE(is_rank_one(m));
    }
}

TEST(Bound, Deterministic) {
    std::mt19937_64 rng(1);
    const auto m = *prune(oracle::random_partial(70, 30, 0.2, rng, true), 0);
    BoundConfig cfg;
    cfg.seed = 99;
    const auto a = estimate_dimension_upper_bound(m, cfg);
    const auto b = estimate_dimension_upper_bound(m, cfg);
    EXPECT_EQ(a.r_hat, b.r_hat);
    EXPECT_EQ(a.permutation, b.permutation);
    EXPECT_EQ(a.completion, b.completion);
    EXPECT_EQ(a.forest, b.forest);
}
