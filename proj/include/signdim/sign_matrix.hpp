#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace signdim {

enum class Direction : std::uint8_t { Up, Down };

struct Vote {
    std::string comment_id;
    std::string voter_id;
    Direction direction;
};

/// Observed sign. An absent entry is the "did not vote" symbol.
enum class Sign : std::int8_t { Down = -1, Up = 1 };

constexpr int to_int(Sign s) { return static_cast<int>(s); }
constexpr Sign negate(Sign s) { return s == Sign::Up ? Sign::Down : Sign::Up; }
constexpr Sign sign_of(Direction d) { return d == Direction::Up ? Sign::Up : Sign::Down; }

struct Entry {
    std::size_t row;
    std::size_t col;
    Sign sign;

    friend bool operator==(const Entry&, const Entry&) = default;
};

/// Comments x voters matrix over {+1, -1, ?}. Rows are comments, columns are
/// voters. Immutable once built; entries are kept sorted by (row, col).
class PartialSignMatrix {
public:
    PartialSignMatrix() = default;

    /// Throws InvalidParams on out-of-range indices or label count mismatch and
    /// ConflictingVote on a repeated cell with different signs. Exact duplicates
    /// collapse. Empty label vectors are filled with "r<i>" / "c<j>".
    PartialSignMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<Entry> entries,
                      std::vector<std::string> row_labels = {},
                      std::vector<std::string> col_labels = {});

    /// Dense literal helper: +1 / -1 observed, 0 unknown.
    static PartialSignMatrix from_dense(const std::vector<std::vector<int>>& cells);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return n_cols_; }
    std::size_t n_observed() const { return entries_.size(); }
    bool empty() const { return n_rows_ == 0 && n_cols_ == 0; }

    std::optional<Sign> at(std::size_t row, std::size_t col) const;
    /// +1, -1 or 0 for unknown.
    int value(std::size_t row, std::size_t col) const;

    std::span<const Entry> entries() const { return entries_; }
    std::span<const Entry> row_entries(std::size_t row) const;

    const std::vector<std::string>& row_labels() const { return row_labels_; }
    const std::vector<std::string>& col_labels() const { return col_labels_; }

    /// Dense copy with 0 for unknown cells, row-major.
    std::vector<std::vector<int>> to_dense() const;

    friend bool operator==(const PartialSignMatrix&, const PartialSignMatrix&) = default;

private:
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<Entry> entries_;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<std::string> row_labels_;
    std::vector<std::string> col_labels_;
};

struct MatrixStats {
    std::size_t n_observed = 0;
    double sparsity = 0.0;
    std::size_t n_unique_patterns = 0;
    double upvote_fraction = 0.0;
};

/// Up -> +1, Down -> -1; row/column indices by first appearance of each id.
PartialSignMatrix from_vote_triplets(std::span<const Vote> records);

PartialSignMatrix transpose(const PartialSignMatrix& m);

/// Drops all-unknown rows and columns. Returns nullopt (the Empty marker) when
/// fewer than min_comments rows survive.
std::optional<PartialSignMatrix> prune(const PartialSignMatrix& m, std::size_t min_comments);

/// Unique patterns are distinct columns over the alphabet {+1, -1, ?}.
MatrixStats stats(const PartialSignMatrix& m);

/// True when every row and every column has at least one observed entry.
bool is_pruned(const PartialSignMatrix& m);

}  // namespace signdim
