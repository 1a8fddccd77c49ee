#include "signdim/rank_one.hpp"

#include <queue>

#include "signdim/error.hpp"

namespace signdim {

std::optional<RankOneWitness> is_rank_one(const PartialSignMatrix& m) {
    if (m.n_observed() == 0) throw Error(ErrorKind::EmptyMatrix, "no observed votes");

    const std::size_t n_rows = m.n_rows();
    const std::size_t n_nodes = n_rows + m.n_cols();
    // Nodes [0, n_rows) are comments, the rest voters.
    std::vector<std::vector<std::pair<std::size_t, int>>> adj(n_nodes);
    for (const Entry& e : m.entries()) {
        adj[e.row].emplace_back(n_rows + e.col, to_int(e.sign));
        adj[n_rows + e.col].emplace_back(e.row, to_int(e.sign));
    }

    std::vector<int> value(n_nodes, 0);
    std::queue<std::size_t> frontier;
    for (std::size_t seed = 0; seed < n_nodes; ++seed) {
        if (value[seed] != 0) continue;
        value[seed] = 1;
        frontier.push(seed);
        while (!frontier.empty()) {
            const std::size_t u = frontier.front();
            frontier.pop();
            for (const auto& [v, s] : adj[u]) {
                const int expected = value[u] * s;
                if (value[v] == 0) {
                    value[v] = expected;
                    frontier.push(v);
                } else if (value[v] != expected) {
                    return std::nullopt;
                }
            }
        }
    }

    RankOneWitness w;
    w.comment_signs.assign(value.begin(), value.begin() + static_cast<std::ptrdiff_t>(n_rows));
    w.voter_signs.assign(value.begin() + static_cast<std::ptrdiff_t>(n_rows), value.end());
    return w;
}

bool validates(const RankOneWitness& w, const PartialSignMatrix& m) {
    if (w.comment_signs.size() != m.n_rows() || w.voter_signs.size() != m.n_cols()) return false;
    for (const Entry& e : m.entries())
        if (w.comment_signs[e.row] * w.voter_signs[e.col] != to_int(e.sign)) return false;
    return true;
}

}  // namespace signdim
