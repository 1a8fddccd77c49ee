#include "signdim/sign_matrix.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "signdim/error.hpp"

namespace signdim {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ConflictingVote: return "ConflictingVote";
        case ErrorKind::EmptyMatrix: return "EmptyMatrix";
        case ErrorKind::PrecondViolated: return "PrecondViolated";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::InvalidModel: return "InvalidModel";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::TooFewComments: return "TooFewComments";
        case ErrorKind::TooFewVotes: return "TooFewVotes";
        case ErrorKind::InvalidParams: return "InvalidParams";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

namespace {

std::vector<std::string> default_labels(char prefix, std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

}  // namespace

PartialSignMatrix::PartialSignMatrix(std::size_t n_rows, std::size_t n_cols,
                                     std::vector<Entry> entries,
                                     std::vector<std::string> row_labels,
                                     std::vector<std::string> col_labels)
    : n_rows_(n_rows), n_cols_(n_cols), entries_(std::move(entries)) {
    if (row_labels.empty()) row_labels = default_labels('r', n_rows);
    if (col_labels.empty()) col_labels = default_labels('c', n_cols);
    if (row_labels.size() != n_rows || col_labels.size() != n_cols)
        throw Error(ErrorKind::InvalidParams, "label count does not match matrix shape");
    row_labels_ = std::move(row_labels);
    col_labels_ = std::move(col_labels);

    for (const Entry& e : entries_) {
        if (e.row >= n_rows_ || e.col >= n_cols_)
            throw Error(ErrorKind::InvalidParams,
                        "entry (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                            ") outside " + std::to_string(n_rows_) + "x" + std::to_string(n_cols_));
    }
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<Entry> unique;
    unique.reserve(entries_.size());
    for (const Entry& e : entries_) {
        if (!unique.empty() && unique.back().row == e.row && unique.back().col == e.col) {
            if (unique.back().sign != e.sign)
                throw Error(ErrorKind::ConflictingVote,
                            "(" + row_labels_[e.row] + ", " + col_labels_[e.col] + ")");
            continue;
        }
        unique.push_back(e);
    }
    entries_ = std::move(unique);

    row_offsets_.assign(n_rows_ + 1, 0);
    for (const Entry& e : entries_) ++row_offsets_[e.row + 1];
    for (std::size_t i = 0; i < n_rows_; ++i) row_offsets_[i + 1] += row_offsets_[i];
}

PartialSignMatrix PartialSignMatrix::from_dense(const std::vector<std::vector<int>>& cells) {
    const std::size_t rows = cells.size();
    const std::size_t cols = rows == 0 ? 0 : cells.front().size();
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < rows; ++i) {
        if (cells[i].size() != cols) throw Error(ErrorKind::InvalidParams, "ragged dense matrix");
        for (std::size_t j = 0; j < cols; ++j) {
            const int v = cells[i][j];
            if (v == 0) continue;
            if (v != 1 && v != -1) throw Error(ErrorKind::InvalidParams, "cells must be -1, 0 or +1");
            entries.push_back({i, j, v > 0 ? Sign::Up : Sign::Down});
        }
    }
    return PartialSignMatrix(rows, cols, std::move(entries));
}

std::span<const Entry> PartialSignMatrix::row_entries(std::size_t row) const {
    if (row >= n_rows_) throw Error(ErrorKind::IndexOutOfRange, "row " + std::to_string(row));
    return std::span<const Entry>(entries_).subspan(row_offsets_[row],
                                                    row_offsets_[row + 1] - row_offsets_[row]);
}

std::optional<Sign> PartialSignMatrix::at(std::size_t row, std::size_t col) const {
    if (col >= n_cols_) throw Error(ErrorKind::IndexOutOfRange, "col " + std::to_string(col));
    const auto r = row_entries(row);
    const auto it = std::lower_bound(r.begin(), r.end(), col,
                                     [](const Entry& e, std::size_t c) { return e.col < c; });
    if (it == r.end() || it->col != col) return std::nullopt;
    return it->sign;
}

int PartialSignMatrix::value(std::size_t row, std::size_t col) const {
    const auto s = at(row, col);
    return s ? to_int(*s) : 0;
}

std::vector<std::vector<int>> PartialSignMatrix::to_dense() const {
    std::vector<std::vector<int>> out(n_rows_, std::vector<int>(n_cols_, 0));
    for (const Entry& e : entries_) out[e.row][e.col] = to_int(e.sign);
    return out;
}

PartialSignMatrix from_vote_triplets(std::span<const Vote> records) {
    std::unordered_map<std::string, std::size_t> row_index;
    std::unordered_map<std::string, std::size_t> col_index;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<Entry> entries;
    entries.reserve(records.size());

    auto intern = [](std::unordered_map<std::string, std::size_t>& index,
                     std::vector<std::string>& labels, const std::string& id) {
        auto [it, inserted] = index.try_emplace(id, labels.size());
        if (inserted) labels.push_back(id);
        return it->second;
    };

    for (const Vote& v : records) {
        if (v.comment_id.empty() || v.voter_id.empty())
            throw Error(ErrorKind::InvalidParams, "vote with empty comment or voter id");
        const std::size_t i = intern(row_index, row_labels, v.comment_id);
        const std::size_t j = intern(col_index, col_labels, v.voter_id);
        entries.push_back({i, j, sign_of(v.direction)});
    }
    const std::size_t rows = row_labels.size();
    const std::size_t cols = col_labels.size();
    return PartialSignMatrix(rows, cols, std::move(entries), std::move(row_labels),
                             std::move(col_labels));
}

PartialSignMatrix transpose(const PartialSignMatrix& m) {
    std::vector<Entry> entries;
    entries.reserve(m.n_observed());
    for (const Entry& e : m.entries()) entries.push_back({e.col, e.row, e.sign});
    return PartialSignMatrix(m.n_cols(), m.n_rows(), std::move(entries), m.col_labels(),
                             m.row_labels());
}

std::optional<PartialSignMatrix> prune(const PartialSignMatrix& m, std::size_t min_comments) {
    std::vector<bool> row_seen(m.n_rows(), false);
    std::vector<bool> col_seen(m.n_cols(), false);
    for (const Entry& e : m.entries()) {
        row_seen[e.row] = true;
        col_seen[e.col] = true;
    }
    // An all-unknown row holds no entries, so dropping rows never empties a column.
    constexpr std::size_t kDropped = static_cast<std::size_t>(-1);
    std::vector<std::size_t> row_map(m.n_rows(), kDropped);
    std::vector<std::size_t> col_map(m.n_cols(), kDropped);
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        if (!row_seen[i]) continue;
        row_map[i] = row_labels.size();
        row_labels.push_back(m.row_labels()[i]);
    }
    for (std::size_t j = 0; j < m.n_cols(); ++j) {
        if (!col_seen[j]) continue;
        col_map[j] = col_labels.size();
        col_labels.push_back(m.col_labels()[j]);
    }
    if (row_labels.size() < min_comments || row_labels.empty()) return std::nullopt;

    std::vector<Entry> entries;
    entries.reserve(m.n_observed());
    for (const Entry& e : m.entries()) entries.push_back({row_map[e.row], col_map[e.col], e.sign});
    const std::size_t rows = row_labels.size();
    const std::size_t cols = col_labels.size();
    return PartialSignMatrix(rows, cols, std::move(entries), std::move(row_labels),
                             std::move(col_labels));
}

MatrixStats stats(const PartialSignMatrix& m) {
    MatrixStats s;
    s.n_observed = m.n_observed();
    const double cells = static_cast<double>(m.n_rows()) * static_cast<double>(m.n_cols());
    s.sparsity = cells > 0 ? static_cast<double>(s.n_observed) / cells : 0.0;

    std::size_t ups = 0;
    // Column pattern as its sorted (row, sign) list; unknown rows are implicit.
    std::vector<std::vector<std::pair<std::size_t, int>>> columns(m.n_cols());
    for (const Entry& e : m.entries()) {
        columns[e.col].emplace_back(e.row, to_int(e.sign));
        if (e.sign == Sign::Up) ++ups;
    }
    std::set<std::vector<std::pair<std::size_t, int>>> patterns(columns.begin(), columns.end());
    s.n_unique_patterns = patterns.size();
    s.upvote_fraction = s.n_observed > 0 ? static_cast<double>(ups) / s.n_observed : 0.0;
    return s;
}

bool is_pruned(const PartialSignMatrix& m) {
    std::vector<bool> col_seen(m.n_cols(), false);
    for (const Entry& e : m.entries()) col_seen[e.col] = true;
    for (std::size_t i = 0; i < m.n_rows(); ++i)
        if (m.row_entries(i).empty()) return false;
    return std::all_of(col_seen.begin(), col_seen.end(), [](bool b) { return b; });
}

}  // namespace signdim
