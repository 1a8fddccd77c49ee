#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "signdim/sign_matrix.hpp"

namespace signdim {

/// Comment and voter opinions in a shared r-dimensional space, with every
/// entry bounded by alpha in absolute value.
struct OpinionEmbedding {
    Eigen::MatrixXd C;
    Eigen::MatrixXd V;
    double alpha = 10.0;

    int r() const { return static_cast<int>(C.cols()); }
};

struct FitConfig {
    int r = 2;
    double alpha = 10.0;
    double step_size = 0.05;
    int n_epochs = 500;
    int batch = 64;
    std::uint64_t seed = 0;
    /// Stop once the relative objective improvement over an epoch drops below this.
    double tol = 1e-6;
};

void validate(const FitConfig& cfg);

/// Logistic probability 1 / (1 + exp(-s <c_i, v_j>)).
double predict_prob(const OpinionEmbedding& emb, std::size_t i, std::size_t j, Sign s);

/// -sum over observed (i, j) of log(1 + exp(-s_ij <c_i, v_j>)); always <= 0.
double log_likelihood(const PartialSignMatrix& m, const OpinionEmbedding& emb);

/// Analytic gradient of log_likelihood with respect to C and V.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gradient(const PartialSignMatrix& m,
                                                     const OpinionEmbedding& emb);

/// Entrywise clamp to [-alpha, alpha]: the Euclidean projection onto the
/// infinity-norm ball.
Eigen::MatrixXd project_inf_norm(const Eigen::MatrixXd& M, double alpha);

/// Projected minibatch stochastic gradient ascent on the log-likelihood.
/// Starts from entries uniform on [-0.1, 0.1] and projects after every step.
/// Returns the best iterate seen at an epoch boundary, so the objective never
/// ends below its starting value.
OpinionEmbedding fit(const PartialSignMatrix& m, const FitConfig& cfg);

/// Same as fit() but from a given starting embedding (projected first).
OpinionEmbedding fit_from(const PartialSignMatrix& m, const FitConfig& cfg, OpinionEmbedding start);

}  // namespace signdim
