#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "signdim/error.hpp"
#include "signdim/io.hpp"
#include "signdim/sign_matrix.hpp"

using namespace signdim;

namespace {

PartialSignMatrix single_down() {
    return PartialSignMatrix::from_dense({{1, 1, 1}, {1, -1, 1}, {1, 1, 1}});
}

std::vector<Vote> votes(std::initializer_list<std::tuple<const char*, const char*, Direction>> list) {
    std::vector<Vote> out;
    for (const auto& [c, v, d] : list) out.push_back({c, v, d});
    return out;
}

}  // namespace

TEST(FromVoteTriplets, EmptyInputGivesEmptyMatrix) {
    const auto m = from_vote_triplets(std::vector<Vote>{});
    EXPECT_EQ(m.n_rows(), 0u);
    EXPECT_EQ(m.n_cols(), 0u);
    EXPECT_EQ(m.n_observed(), 0u);
}

TEST(FromVoteTriplets, DuplicateCollapses) {
    const auto m = from_vote_triplets(votes({{"c1", "v1", Direction::Up}, {"c1", "v1", Direction::Up}}));
    EXPECT_EQ(m.n_rows(), 1u);
    EXPECT_EQ(m.n_cols(), 1u);
    ASSERT_EQ(m.n_observed(), 1u);
    EXPECT_EQ(m.at(0, 0), Sign::Up);
}

TEST(FromVoteTriplets, ConflictNamesThePair) {
    try {
        from_vote_triplets(votes({{"c7", "alice", Direction::Up}, {"c7", "alice", Direction::Down}}));
        FAIL() << "expected ConflictingVote";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ConflictingVote);
        EXPECT_NE(std::string(e.what()).find("c7"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("alice"), std::string::npos);
    }
}

TEST(FromVoteTriplets, IndicesByFirstAppearance) {
    const auto m = from_vote_triplets(votes({{"b", "y", Direction::Down},
                                             {"a", "x", Direction::Up},
                                             {"b", "x", Direction::Up}}));
    EXPECT_EQ(m.row_labels(), (std::vector<std::string>{"b", "a"}));
    EXPECT_EQ(m.col_labels(), (std::vector<std::string>{"y", "x"}));
    EXPECT_EQ(m.value(0, 0), -1);
    EXPECT_EQ(m.value(1, 1), 1);
    EXPECT_EQ(m.value(1, 0), 0);
}

TEST(Transpose, RowVectorBecomesColumn) {
    const auto m = PartialSignMatrix::from_dense({{1, 0}});
    const auto t = transpose(m);
    EXPECT_EQ(t.n_rows(), 2u);
    EXPECT_EQ(t.n_cols(), 1u);
    EXPECT_EQ(t.value(0, 0), 1);
    EXPECT_EQ(t.value(1, 0), 0);
}

TEST(Transpose, SingleDownKeepsDownVoteAtMirror) {
    const auto t = transpose(single_down());
    EXPECT_EQ(t.value(1, 1), -1);
    EXPECT_EQ(t.n_observed(), 9u);
}

TEST(Transpose, InvolutionAndStatsPreserved) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = oracle::random_partial(1 + trial % 6, 1 + trial % 5, 0.6, rng);
        const auto t = transpose(m);
        EXPECT_EQ(transpose(t), m);
        EXPECT_EQ(t.n_rows(), m.n_cols());
        EXPECT_EQ(t.n_observed(), m.n_observed());
        EXPECT_DOUBLE_EQ(stats(t).upvote_fraction, stats(m).upvote_fraction);
        for (const Entry& e : m.entries()) EXPECT_EQ(t.at(e.col, e.row), e.sign);
    }
}

TEST(Prune, DropsEmptyColumn) {
    const auto m = PartialSignMatrix::from_dense({{1, 0, -1}, {-1, 0, 1}});
    const auto p = prune(m, 1);
    ASSERT_TRUE(p);
    EXPECT_EQ(p->n_cols(), 2u);
    EXPECT_EQ(p->col_labels(), (std::vector<std::string>{"c0", "c2"}));
    EXPECT_EQ(p->n_observed(), 4u);
}

TEST(Prune, BelowThresholdIsEmpty) {
    std::vector<std::vector<int>> rows(9, std::vector<int>(4, 1));
    EXPECT_FALSE(prune(PartialSignMatrix::from_dense(rows), 10));
    EXPECT_TRUE(prune(PartialSignMatrix::from_dense(rows), 9));
}

TEST(Prune, AlreadyPrunedIsUnchanged) {
    const auto m = single_down();
    const auto p = prune(m, 0);
    ASSERT_TRUE(p);
    EXPECT_EQ(*p, m);
}

TEST(Prune, NeverLosesSurvivingEntries) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = oracle::random_partial(2 + trial % 7, 2 + trial % 4, 0.25, rng);
        const auto p = prune(m, 0);
        if (!p) continue;
        EXPECT_LE(p->n_rows(), m.n_rows());
        EXPECT_LE(p->n_cols(), m.n_cols());
        EXPECT_EQ(p->n_observed(), m.n_observed());
        EXPECT_TRUE(is_pruned(*p));
    }
}

TEST(Stats, AllUpThreeByThree) {
    const auto s = stats(PartialSignMatrix::from_dense({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}));
    EXPECT_DOUBLE_EQ(s.sparsity, 1.0);
    EXPECT_EQ(s.n_unique_patterns, 1u);
    EXPECT_DOUBLE_EQ(s.upvote_fraction, 1.0);
}

TEST(Stats, SingleDownHasTwoPatterns) { EXPECT_EQ(stats(single_down()).n_unique_patterns, 2u); }

TEST(Stats, HalfObserved) {
    const auto s = stats(PartialSignMatrix::from_dense({{1, 0}, {0, -1}}));
    EXPECT_DOUBLE_EQ(s.sparsity, 0.5);
    EXPECT_DOUBLE_EQ(s.upvote_fraction, 0.5);
    EXPECT_EQ(s.n_observed, 2u);
}

TEST(Stats, UnknownCountsAsASymbol) {
    const auto s = stats(PartialSignMatrix::from_dense({{1, 1}, {0, 1}}));
    EXPECT_EQ(s.n_unique_patterns, 2u);
}

TEST(Io, CsvRoundTrip) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = *prune(oracle::random_partial(4, 5, 0.5, rng, true), 0);
        std::stringstream ss;
        io::write_votes_csv(ss, m);
        const auto back = from_vote_triplets(io::read_votes_csv(ss));
        EXPECT_EQ(back.n_observed(), m.n_observed());
        for (const Entry& e : m.entries()) {
            const auto& rl = m.row_labels()[e.row];
            const auto& cl = m.col_labels()[e.col];
            const auto r = std::find(back.row_labels().begin(), back.row_labels().end(), rl) - back.row_labels().begin();
            const auto c = std::find(back.col_labels().begin(), back.col_labels().end(), cl) - back.col_labels().begin();
            EXPECT_EQ(back.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)), e.sign);
        }
    }
}

TEST(Io, JsonMatrixRoundTripIsExact) {
    std::mt19937_64 rng(4);
    const auto m = oracle::random_partial(5, 6, 0.5, rng);
    EXPECT_EQ(io::matrix_from_json(io::matrix_to_json(m)), m);
}

TEST(Io, CsvCaseInsensitiveAndQuoted) {
    std::istringstream in("comment_id,voter_id,vote\n\"c,1\",v1,UP\nc2,v1,Down\n");
    const auto v = io::read_votes_csv(in);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0].comment_id, "c,1");
    EXPECT_EQ(v[0].direction, Direction::Up);
    EXPECT_EQ(v[1].direction, Direction::Down);
}

TEST(Io, CsvRejectsBadVote) {
    std::istringstream in("comment_id,voter_id,vote\nc1,v1,sideways\n");
    try {
        io::read_votes_csv(in);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    }
}

TEST(Io, JsonVotes) {
    std::istringstream in(R"([{"comment_id":"a","voter_id":"x","vote":"down"}])");
    const auto v = io::read_votes_json(in);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].direction, Direction::Down);
}

TEST(Io, MissingFileIsIoError) {
    try {
        io::load_votes("/nonexistent/votes.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
    }
}
