#include "signdim/sc_bound.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <queue>

#include "signdim/error.hpp"
#include "signdim/random.hpp"

namespace signdim {

DenseSignMatrix::DenseSignMatrix(std::size_t n_rows, std::size_t n_cols,
                                 std::vector<std::int8_t> cells)
    : n_rows_(n_rows), n_cols_(n_cols), cells_(std::move(cells)) {
    if (cells_.size() != n_rows_ * n_cols_)
        throw Error(ErrorKind::DimensionMismatch, "dense sign matrix size");
    for (auto c : cells_)
        if (c != 1 && c != -1) throw Error(ErrorKind::InvalidParams, "dense entries must be +-1");
}

DenseSignMatrix DenseSignMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
    const std::size_t n = rows.size();
    const std::size_t m = n == 0 ? 0 : rows.front().size();
    std::vector<std::int8_t> cells;
    cells.reserve(n * m);
    for (const auto& r : rows) {
        if (r.size() != m) throw Error(ErrorKind::InvalidParams, "ragged dense matrix");
        for (int v : r) cells.push_back(static_cast<std::int8_t>(v));
    }
    return DenseSignMatrix(n, m, std::move(cells));
}

std::vector<std::vector<int>> DenseSignMatrix::to_rows() const {
    std::vector<std::vector<int>> out(n_rows_, std::vector<int>(n_cols_));
    for (std::size_t i = 0; i < n_rows_; ++i)
        for (std::size_t j = 0; j < n_cols_; ++j) out[i][j] = (*this)(i, j);
    return out;
}

ForestState::ForestState(const PartialSignMatrix& m)
    : n_rows_(m.n_rows()),
      n_cols_(m.n_cols()),
      cells_(m.n_rows() * m.n_cols(), 0),
      weights_(m.n_rows() * (m.n_rows() > 0 ? m.n_rows() - 1 : 0) / 2, 0),
      tree_parent_(m.n_rows()),
      classes_(m.n_rows(), m.n_cols()) {
    std::iota(tree_parent_.begin(), tree_parent_.end(), std::size_t{0});
    for (const Entry& e : m.entries()) cells_[e.row * n_cols_ + e.col] = static_cast<std::int8_t>(to_int(e.sign));
    n_unknown_ = cells_.size() - m.n_observed();

    // First pass touches every row and column: full pairwise build on bitsets.
    const std::size_t words = (n_cols_ + 63) / 64;
    std::vector<std::uint64_t> known(n_rows_ * words, 0);
    std::vector<std::uint64_t> positive(n_rows_ * words, 0);
    for (const Entry& e : m.entries()) {
        const std::uint64_t bit = std::uint64_t{1} << (e.col % 64);
        known[e.row * words + e.col / 64] |= bit;
        if (e.sign == Sign::Up) positive[e.row * words + e.col / 64] |= bit;
    }
    for (std::size_t u = 0; u < n_rows_; ++u) {
        for (std::size_t v = u + 1; v < n_rows_; ++v) {
            std::uint32_t w = 0;
            for (std::size_t k = 0; k < words; ++k) {
                const std::uint64_t both = known[u * words + k] & known[v * words + k];
                w += static_cast<std::uint32_t>(
                    std::popcount(both & (positive[u * words + k] ^ positive[v * words + k])));
            }
            weights_[pair_index(u, v)] = w;
        }
    }
}

std::size_t ForestState::pair_index(std::size_t u, std::size_t v) const {
    if (u > v) std::swap(u, v);
    return u * n_rows_ - u * (u + 1) / 2 + (v - u - 1);
}

std::uint32_t ForestState::weight(std::size_t u, std::size_t v) const {
    if (u == v || u >= n_rows_ || v >= n_rows_)
        throw Error(ErrorKind::IndexOutOfRange, "edge weight needs two distinct valid rows");
    return weights_[pair_index(u, v)];
}

std::size_t ForestState::tree_root(std::size_t u) const {
    while (tree_parent_[u] != u) {
        tree_parent_[u] = tree_parent_[tree_parent_[u]];
        u = tree_parent_[u];
    }
    return u;
}

bool ForestState::in_same_tree(std::size_t u, std::size_t v) const {
    return tree_root(u) == tree_root(v);
}

bool ForestState::cells_equivalent(std::size_t col, std::size_t row_a, std::size_t row_b) {
    return classes_.same(col, row_a, row_b);
}

void ForestState::assign_class(std::size_t row, std::size_t col, int sign) {
    for (std::size_t r : classes_.members(row, col)) {
        auto& c = cells_[r * n_cols_ + col];
        if (c != 0) continue;
        c = static_cast<std::int8_t>(sign);
        --n_unknown_;
        pending_rows_.push_back(r);
        for (std::size_t other = 0; other < n_rows_; ++other) {
            if (other != r && cells_[other * n_cols_ + col] == -sign) ++weights_[pair_index(r, other)];
        }
    }
}

void ForestState::update(std::size_t u, std::size_t v) {
    if (u == v || u >= n_rows_ || v >= n_rows_)
        throw Error(ErrorKind::IndexOutOfRange, "update needs two distinct valid rows");
    if (in_same_tree(u, v)) throw Error(ErrorKind::PrecondViolated, "edge closes a cycle");
    tree_parent_[tree_root(u)] = tree_root(v);
    forest_.emplace_back(std::min(u, v), std::max(u, v));

    pending_rows_.clear();
    pending_cols_.clear();
    for (std::size_t j = 0; j < n_cols_; ++j) {
        const int su = cell(u, j);
        const int sv = cell(v, j);
        if (su == 0 && sv != 0) {
            assign_class(u, j, sv);
            pending_cols_.push_back(j);
        } else if (su != 0 && sv == 0) {
            assign_class(v, j, su);
            pending_cols_.push_back(j);
        } else if (su == 0 && sv == 0) {
            classes_.merge(j, u, v);
        }
    }
    std::sort(pending_rows_.begin(), pending_rows_.end());
    pending_rows_.erase(std::unique(pending_rows_.begin(), pending_rows_.end()), pending_rows_.end());
}

DenseSignMatrix ForestState::completion() const {
    if (n_unknown_ != 0)
        throw Error(ErrorKind::PrecondViolated,
                    std::to_string(n_unknown_) + " cells still unknown");
    return DenseSignMatrix(n_rows_, n_cols_, cells_);
}

std::uint32_t edge_weight(std::size_t u, std::size_t v, const ForestState& state) {
    return state.weight(u, v);
}

void update(const RowEdge& edge, ForestState& state) { state.update(edge.first, edge.second); }

namespace {

struct Candidate {
    std::uint32_t weight;
    std::uint64_t tie_key;
    std::uint32_t u;
    std::uint32_t v;
};

struct CandidateAfter {
    bool operator()(const Candidate& a, const Candidate& b) const {
        return a.weight != b.weight ? a.weight > b.weight : a.tie_key > b.tie_key;
    }
};

}  // namespace

SpanningTree build_spanning_tree(const PartialSignMatrix& m, std::uint64_t seed) {
    if (!is_pruned(m))
        throw Error(ErrorKind::PrecondViolated,
                    "every row and column needs an observed entry; prune first");
    ForestState state(m);
    const std::size_t n = m.n_rows();

    // Weights only grow, so a stored weight is a lower bound on the current
    // one. A popped candidate whose stored weight is stale is re-queued; one
    // that is current is the exact (weight, tie_key) minimum. The per-edge
    // tie keys are i.i.d. uniform, so the winner among equal weights is uniform.
    std::vector<Candidate> heap;
    heap.reserve(n * (n > 0 ? n - 1 : 0) / 2);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
            heap.push_back({state.weight(u, v), mix64(seed ^ mix64(u * n + v)),
                            static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)});
    std::priority_queue<Candidate, std::vector<Candidate>, CandidateAfter> queue(CandidateAfter{},
                                                                                 std::move(heap));

    while (state.forest_edges().size() + 1 < n) {
        Candidate top = queue.top();
        queue.pop();
        if (state.in_same_tree(top.u, top.v)) continue;
        const std::uint32_t current = state.weight(top.u, top.v);
        if (current != top.weight) {
            top.weight = current;
            queue.push(top);
            continue;
        }
        state.update(top.u, top.v);
    }
    return {state.forest_edges(), state.completion()};
}

std::vector<std::size_t> walk_permutation(const std::vector<RowEdge>& forest, std::size_t n_rows,
                                          std::size_t source,
                                          std::optional<std::uint64_t> shuffle_seed) {
    if (source >= n_rows) throw Error(ErrorKind::IndexOutOfRange, "walk source");
    std::vector<std::vector<std::size_t>> children(n_rows);
    for (const auto& [a, b] : forest) {
        if (a >= n_rows || b >= n_rows) throw Error(ErrorKind::IndexOutOfRange, "forest edge");
        children[a].push_back(b);
        children[b].push_back(a);
    }
    for (auto& c : children) std::sort(c.begin(), c.end());
    if (shuffle_seed) {
        Rng rng(*shuffle_seed);
        for (auto& c : children) std::shuffle(c.begin(), c.end(), rng);
    }

    std::vector<std::size_t> order;
    order.reserve(n_rows);
    std::vector<bool> seen(n_rows, false);
    std::vector<std::size_t> stack{source};
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        if (seen[u]) continue;
        seen[u] = true;
        order.push_back(u);
        for (auto it = children[u].rbegin(); it != children[u].rend(); ++it)
            if (!seen[*it]) stack.push_back(*it);
    }
    if (order.size() != n_rows)
        throw Error(ErrorKind::PrecondViolated, "forest does not span all rows");
    return order;
}

int sign_changes(const DenseSignMatrix& completion, const std::vector<std::size_t>& permutation) {
    if (permutation.size() != completion.n_rows())
        throw Error(ErrorKind::DimensionMismatch, "permutation length");
    int best = 0;
    for (std::size_t j = 0; j < completion.n_cols(); ++j) {
        int changes = 0;
        for (std::size_t k = 0; k + 1 < permutation.size(); ++k)
            if (completion(permutation[k], j) != completion(permutation[k + 1], j)) ++changes;
        best = std::max(best, changes);
    }
    return best;
}

BoundResult estimate_single_orientation(const PartialSignMatrix& m, const BoundConfig& config,
                                        Orientation orientation) {
    if (m.n_observed() == 0) throw Error(ErrorKind::EmptyMatrix, "no observed votes");
    const PartialSignMatrix oriented = orientation == Orientation::AsGiven ? m : transpose(m);
    const std::uint64_t stream = orientation == Orientation::AsGiven ? 0 : 1;
    SpanningTree tree = build_spanning_tree(oriented, derive_seed(config.seed, stream));
    const std::size_t n = oriented.n_rows();

    std::vector<std::size_t> sources(n);
    std::iota(sources.begin(), sources.end(), std::size_t{0});
    if (n > config.exhaustive_source_limit) {
        Rng rng(derive_seed(config.seed, 100 + stream));
        std::shuffle(sources.begin(), sources.end(), rng);
        sources.resize(std::min(n, std::max<std::size_t>(config.n_sources, 1)));
    }

    BoundResult best;
    best.sc_value = -1;
    for (std::size_t source : sources) {
        auto perm = walk_permutation(tree.forest, n, source,
                                     derive_seed(config.seed, 1000 + 2 * source + stream));
        const int sc = sign_changes(tree.completion, perm);
        if (best.sc_value < 0 || sc < best.sc_value) {
            best.sc_value = sc;
            best.permutation = std::move(perm);
            best.source_row = source;
        }
    }
    best.r_hat = best.sc_value + 1;
    best.orientation = orientation;
    best.completion = std::move(tree.completion);
    best.forest = std::move(tree.forest);
    return best;
}

BoundResult estimate_dimension_upper_bound(const PartialSignMatrix& m, const BoundConfig& config) {
    BoundResult best = estimate_single_orientation(m, config, Orientation::AsGiven);
    if (config.try_transpose) {
        BoundResult other = estimate_single_orientation(m, config, Orientation::Transposed);
        if (other.r_hat < best.r_hat) best = std::move(other);
    }
    return best;
}

}  // namespace signdim
