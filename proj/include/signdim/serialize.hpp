#pragma once

#include <nlohmann/json.hpp>

#include "signdim/analysis.hpp"
#include "signdim/feasibility.hpp"
#include "signdim/mle_embed.hpp"
#include "signdim/rank_one.hpp"
#include "signdim/sc_bound.hpp"
#include "signdim/sign_matrix.hpp"

namespace signdim {

using nlohmann::json;

json matrix_rows_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_rows_json(const json& j, Eigen::Index expected_cols = -1);

json to_json(const MatrixStats& s);
json to_json(const RankOneWitness& w);
json to_json(const Witness& w);
json to_json(const FeasibilityOutcome& o);
json to_json(const BoundResult& b);
json to_json(const DimensionReport& d);
json to_json(const LooResult& l);

/// {C, V, alpha, r, final_objective}; labels are added when given.
json to_json(const OpinionEmbedding& emb, double final_objective,
             const std::vector<std::string>* row_labels = nullptr,
             const std::vector<std::string>* col_labels = nullptr);
OpinionEmbedding embedding_from_json(const json& j);

}  // namespace signdim
