#include "signdim/serialize.hpp"

#include "signdim/error.hpp"

namespace signdim {

json matrix_rows_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_rows_json(const json& j, Eigen::Index expected_cols) {
    try {
        const auto n = static_cast<Eigen::Index>(j.size());
        Eigen::Index cols = expected_cols;
        if (cols < 0) cols = n > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
        Eigen::MatrixXd M(n, cols);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& row = j.at(static_cast<std::size_t>(i));
            if (static_cast<Eigen::Index>(row.size()) != cols)
                throw Error(ErrorKind::ParseError, "ragged matrix rows");
            for (Eigen::Index k = 0; k < cols; ++k) M(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
        }
        return M;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
}

json to_json(const MatrixStats& s) {
    return {{"n_observed", s.n_observed},
            {"sparsity", s.sparsity},
            {"n_unique_patterns", s.n_unique_patterns},
            {"upvote_fraction", s.upvote_fraction}};
}

json to_json(const RankOneWitness& w) {
    return {{"comment_signs", w.comment_signs}, {"voter_signs", w.voter_signs}};
}

json to_json(const Witness& w) {
    return {{"r", w.dimension()}, {"C", matrix_rows_json(w.C)}, {"V", matrix_rows_json(w.V)}};
}

json to_json(const FeasibilityOutcome& o) {
    json j{{"r", o.r}, {"status", to_string(o.status)}, {"method", to_string(o.method)}};
    if (o.witness) j["witness"] = to_json(*o.witness);
    if (!o.solver_transcript.empty()) j["solver_output"] = o.solver_transcript;
    return j;
}

json to_json(const BoundResult& b) {
    json forest = json::array();
    for (const auto& [u, v] : b.forest) forest.push_back({u, v});
    return {{"r_hat", b.r_hat},
            {"sc_value", b.sc_value},
            {"orientation", b.orientation == Orientation::AsGiven ? "AsGiven" : "Transposed"},
            {"source_row", b.source_row},
            {"permutation", b.permutation},
            {"forest", std::move(forest)},
            {"completion", b.completion.to_rows()}};
}

json to_json(const DimensionReport& d) {
    json j{{"discussion_id", d.discussion_id},
           {"r_estimate", d.r_estimate},
           {"method", to_string(d.method)},
           {"exact", d.exact}};
    json stages = json::array();
    for (const auto& s : d.stages) {
        json sj{{"r", s.r}, {"status", to_string(s.status)}, {"method", to_string(s.method)}};
        stages.push_back(std::move(sj));
    }
    j["stages"] = std::move(stages);
    if (d.rank_one_witness) j["rank_one_witness"] = to_json(*d.rank_one_witness);
    if (d.witness) j["witness"] = to_json(*d.witness);
    if (d.bound) j["bound"] = to_json(*d.bound);
    return j;
}

json to_json(const LooResult& l) {
    return {{"n_evaluated", l.n_evaluated},
            {"n_correct", l.n_correct},
            {"accuracy", l.accuracy},
            {"skipped", l.skipped}};
}

json to_json(const OpinionEmbedding& emb, double final_objective,
             const std::vector<std::string>* row_labels, const std::vector<std::string>* col_labels) {
    json j{{"C", matrix_rows_json(emb.C)},
           {"V", matrix_rows_json(emb.V)},
           {"alpha", emb.alpha},
           {"r", emb.r()},
           {"final_objective", final_objective}};
    if (row_labels) j["row_labels"] = *row_labels;
    if (col_labels) j["col_labels"] = *col_labels;
    return j;
}

OpinionEmbedding embedding_from_json(const json& j) {
    try {
        const auto r = j.at("r").get<Eigen::Index>();
        OpinionEmbedding emb;
        emb.C = matrix_from_rows_json(j.at("C"), r);
        emb.V = matrix_from_rows_json(j.at("V"), r);
        emb.alpha = j.at("alpha").get<double>();
        return emb;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
}

}  // namespace signdim
