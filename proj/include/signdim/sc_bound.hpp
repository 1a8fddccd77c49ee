#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "signdim/cell_classes.hpp"
#include "signdim/sign_matrix.hpp"

namespace signdim {

/// Fully observed sign matrix, row-major, entries +1 / -1.
class DenseSignMatrix {
public:
    DenseSignMatrix() = default;
    DenseSignMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::int8_t> cells);
    static DenseSignMatrix from_rows(const std::vector<std::vector<int>>& rows);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return n_cols_; }
    int operator()(std::size_t row, std::size_t col) const {
        return cells_[row * n_cols_ + col];
    }
    std::vector<std::vector<int>> to_rows() const;

    friend bool operator==(const DenseSignMatrix&, const DenseSignMatrix&) = default;

private:
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<std::int8_t> cells_;
};

using RowEdge = std::pair<std::size_t, std::size_t>;

/// Working state of the sign-minimizing spanning tree construction.
///
/// Holds a completing copy of the input, the forest built so far, the
/// known-known disagreement weight of every row pair, and the per-column
/// equivalence classes of still-unknown cells. Weights only ever increase:
/// every time a cell receives a sign, each other row already holding the
/// opposite sign in that column gets its pair weight incremented, so a weight
/// always equals the disagreement count on the current working matrix.
class ForestState {
public:
    explicit ForestState(const PartialSignMatrix& m);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return n_cols_; }

    /// Working entry: +1, -1 or 0 while unknown.
    int cell(std::size_t row, std::size_t col) const { return cells_[row * n_cols_ + col]; }
    std::uint32_t weight(std::size_t u, std::size_t v) const;

    const std::vector<RowEdge>& forest_edges() const { return forest_; }
    bool in_same_tree(std::size_t u, std::size_t v) const;
    bool cells_equivalent(std::size_t col, std::size_t row_a, std::size_t row_b);

    /// Rows and columns whose cells were filled by the last update (Z and Y).
    const std::vector<std::size_t>& pending_rows() const { return pending_rows_; }
    const std::vector<std::size_t>& pending_cols() const { return pending_cols_; }

    std::size_t n_unknown() const { return n_unknown_; }

    /// Adds {u, v} to the forest and completes the pair's cells column by
    /// column: known/unknown copies the known sign onto the unknown cell's whole
    /// class, unknown/unknown joins the two classes, known/known is untouched.
    /// Throws PrecondViolated if the edge would close a cycle.
    void update(std::size_t u, std::size_t v);

    /// Throws PrecondViolated while any cell is still unknown.
    DenseSignMatrix completion() const;

private:
    std::size_t pair_index(std::size_t u, std::size_t v) const;
    std::size_t tree_root(std::size_t u) const;
    void assign_class(std::size_t row, std::size_t col, int sign);

    std::size_t n_rows_;
    std::size_t n_cols_;
    std::vector<std::int8_t> cells_;
    std::vector<std::uint32_t> weights_;
    mutable std::vector<std::size_t> tree_parent_;
    std::vector<RowEdge> forest_;
    CellClasses classes_;
    std::vector<std::size_t> pending_rows_;
    std::vector<std::size_t> pending_cols_;
    std::size_t n_unknown_ = 0;
};

/// Count of columns where both working entries are known and differ.
std::uint32_t edge_weight(std::size_t u, std::size_t v, const ForestState& state);

void update(const RowEdge& edge, ForestState& state);

struct SpanningTree {
    std::vector<RowEdge> forest;
    DenseSignMatrix completion;
};

/// Greedy sign-minimizing spanning tree over the rows. Each step takes the
/// minimum-weight edge that keeps the forest acyclic; ties go to a uniformly
/// random candidate derived from `seed`. Requires every row and column to hold
/// an observation (PrecondViolated otherwise).
SpanningTree build_spanning_tree(const PartialSignMatrix& m, std::uint64_t seed);

/// DFS preorder of the tree from `source`. Children are taken in ascending
/// index order, or in a seeded shuffle of that order when `shuffle_seed` is set.
std::vector<std::size_t> walk_permutation(const std::vector<RowEdge>& forest, std::size_t n_rows,
                                          std::size_t source,
                                          std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// Maximum over columns of adjacent sign changes under the row permutation.
int sign_changes(const DenseSignMatrix& completion, const std::vector<std::size_t>& permutation);

enum class Orientation : std::uint8_t { AsGiven, Transposed };

struct BoundConfig {
    std::uint64_t seed = 0;
    std::size_t exhaustive_source_limit = 64;
    std::size_t n_sources = 32;
    bool try_transpose = true;
};

/// The completion and permutation live in the result's orientation: for
/// Transposed they index the transposed matrix (voters as rows).
struct BoundResult {
    int r_hat = 0;
    DenseSignMatrix completion;
    std::vector<std::size_t> permutation;
    int sc_value = 0;
    Orientation orientation = Orientation::AsGiven;
    std::size_t source_row = 0;
    std::vector<RowEdge> forest;
};

BoundResult estimate_single_orientation(const PartialSignMatrix& m, const BoundConfig& config,
                                        Orientation orientation);

/// Upper bound r_hat = SC(S') + 1 >= sign-rank, minimized over walk sources
/// and over both orientations.
BoundResult estimate_dimension_upper_bound(const PartialSignMatrix& m, const BoundConfig& config);

}  // namespace signdim
