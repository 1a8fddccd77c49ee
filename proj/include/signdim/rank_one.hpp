#pragma once

#include <optional>
#include <vector>

#include "signdim/sign_matrix.hpp"

namespace signdim {

/// +-1 per comment and per voter with comment_signs[i] * voter_signs[j] == s_ij
/// on every observed entry.
struct RankOneWitness {
    std::vector<int> comment_signs;
    std::vector<int> voter_signs;
};

/// Exact sign-rank-1 test. Each connected component of the bipartite vote
/// graph is seeded with +1 and signs are propagated by BFS along edges
/// (destination = source * edge sign). Isolated nodes get +1.
/// Throws EmptyMatrix when nothing is observed.
std::optional<RankOneWitness> is_rank_one(const PartialSignMatrix& m);

bool validates(const RankOneWitness& w, const PartialSignMatrix& m);

}  // namespace signdim
