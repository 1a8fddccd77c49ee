#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "signdim/feasibility.hpp"
#include "signdim/mle_embed.hpp"
#include "signdim/rank_one.hpp"
#include "signdim/sc_bound.hpp"
#include "signdim/sign_matrix.hpp"

namespace signdim {

// ---------------------------------------------------------------------------
// Dimension pipeline

enum class DimensionMethod : std::uint8_t { ExactRankOne, FeasibilityWitness, ScBound };

std::string_view to_string(DimensionMethod m);

struct PipelineConfig {
    /// Feasibility is attempted for r = 2 .. max_exact; 1 skips straight to the bound.
    int max_exact = 3;
    FeasibilityConfig feasibility;
    BoundConfig bound;
};

struct DimensionReport {
    std::string discussion_id;
    int r_estimate = 0;
    DimensionMethod method = DimensionMethod::ScBound;
    /// True only when the reported r is feasible and every smaller r is
    /// certified infeasible by an exact method.
    bool exact = false;
    std::optional<RankOneWitness> rank_one_witness;
    std::optional<Witness> witness;
    std::optional<BoundResult> bound;
    std::vector<FeasibilityOutcome> stages;
};

/// Rank-one test, then feasibility at r = 2, 3, ..., then the spanning-tree
/// upper bound; the first conclusive stage sets r_estimate.
DimensionReport dimension_pipeline(const PartialSignMatrix& m, const PipelineConfig& config,
                                   std::string discussion_id = {});

// ---------------------------------------------------------------------------
// Metrics

/// Fraction of unordered comment pairs with <c_i, c_k> > 0. Needs >= 2 comments.
double agreement(const Eigen::MatrixXd& comment_opinions);
inline double agreement(const OpinionEmbedding& emb) { return agreement(emb.C); }

/// Lowercased alphanumeric runs.
std::vector<std::string> tokenize(std::string_view text);

/// Mean Jaccard similarity of token sets over unordered comment pairs. Two
/// empty sets count as 1, one empty set as 0. Needs >= 2 comments.
double lexical_similarity(const std::vector<std::string>& comments);

// ---------------------------------------------------------------------------
// Leave-one-out

enum class VoteModel : std::uint8_t { DVM, PVM };

std::string_view to_string(VoteModel m);

struct LooConfig {
    VoteModel model = VoteModel::PVM;
    /// Latent dimension used for refits.
    int r = 2;
    FitConfig fit;
    SearchBudget budget;
    std::size_t max_holdouts = 500;
    std::uint64_t seed = 0;
    /// Start PVM refits from the full-data fit instead of a fresh seeded start.
    bool warm_start = false;
};

struct LooResult {
    std::size_t n_evaluated = 0;
    std::size_t n_correct = 0;
    double accuracy = 0.0;
    std::size_t skipped = 0;
};

/// Copy of m without the entry at (row, col).
PartialSignMatrix without_entry(const PartialSignMatrix& m, std::size_t row, std::size_t col);

/// Holds out each observed vote (or a seeded sample of max_holdouts of them),
/// refits on the rest and predicts it. Holdouts that isolate their row or
/// column, or for which the DVM search finds no witness, are skipped.
/// Throws TooFewVotes when fewer than two votes are observed.
LooResult leave_one_out(const PartialSignMatrix& m, const LooConfig& cfg);

/// Predicts each held-out vote as the majority sign of the remaining votes
/// (ties go Up). Same holdout selection and skipping rules as leave_one_out.
LooResult majority_baseline(const PartialSignMatrix& m, const LooConfig& cfg);

// ---------------------------------------------------------------------------
// Synthetic discussions

enum class SyntheticModel : std::uint8_t { Deterministic, Probabilistic };

std::string_view to_string(SyntheticModel m);

struct SyntheticParams {
    std::size_t n_comments = 20;
    std::size_t n_voters = 20;
    int r_true = 2;
    SyntheticModel model = SyntheticModel::Deterministic;
    double observe_prob = 1.0;
    std::uint64_t seed = 0;
    /// Shifts the first latent coordinate of every comment and voter towards a
    /// shared +1 direction: x_0 = consensus + (1 - consensus) * U[-1, 1].
    /// 0 leaves all coordinates uniform on [-1, 1].
    double consensus = 0.0;
    /// Multiplies every planted coordinate, so probabilistic votes get logits
    /// up to scale^2 * r in magnitude.
    double scale = 1.0;
};

struct SyntheticGroundTruth {
    Eigen::MatrixXd C_true;
    Eigen::MatrixXd V_true;
    int r_true = 0;
    SyntheticModel model = SyntheticModel::Deterministic;
    double observe_prob = 1.0;
    std::uint64_t seed = 0;
};

/// Planted embedding plus observation mask. Deterministic votes follow the
/// >= 0 => up rule, probabilistic ones are drawn from the logistic model. Rows
/// or columns left without observations get their mask resampled.
std::pair<PartialSignMatrix, SyntheticGroundTruth> generate_synthetic(const SyntheticParams& params);

/// Deterministic bag-of-words comment texts: each token is drawn from the
/// vocabulary of a latent axis with probability proportional to |c_ik|.
std::vector<std::string> synthetic_comment_texts(const Eigen::MatrixXd& C, std::size_t words_per_comment,
                                                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// End-to-end report

struct ReportConfig {
    std::size_t min_comments = 1;
    PipelineConfig pipeline;
    bool embed = true;
    /// Embedding fit settings; r <= 0 means "use the pipeline's r_estimate".
    FitConfig fit{.r = 0};
    bool run_loo = false;
    LooConfig loo;
    std::optional<std::filesystem::path> texts;
};

constexpr int kReportSchemaVersion = 1;

/// ingest -> prune -> dimension pipeline -> optional embedding -> stats,
/// agreement, lexical similarity and leave-one-out, as one JSON document.
/// Prune returning Empty is reported as PrecondViolated.
nlohmann::json run_report(const PartialSignMatrix& raw, const ReportConfig& config,
                          const std::string& discussion_id,
                          const std::vector<std::string>* comment_texts = nullptr);

nlohmann::json run_report(const std::filesystem::path& input, const ReportConfig& config);

}  // namespace signdim
