#include "signdim/mle_embed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "signdim/error.hpp"
#include "signdim/random.hpp"

namespace signdim {

namespace {

// log(1 + exp(-x)) without overflow.
double softplus_neg(double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(-x, 0.0); }

// 1 / (1 + exp(x)).
double logistic_neg(double x) {
    if (x >= 0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

void check_shape(const PartialSignMatrix& m, const OpinionEmbedding& emb) {
    if (static_cast<std::size_t>(emb.C.rows()) != m.n_rows() ||
        static_cast<std::size_t>(emb.V.rows()) != m.n_cols() || emb.C.cols() != emb.V.cols())
        throw Error(ErrorKind::DimensionMismatch,
                    "embedding " + std::to_string(emb.C.rows()) + "x" + std::to_string(emb.C.cols()) +
                        " / " + std::to_string(emb.V.rows()) + "x" + std::to_string(emb.V.cols()) +
                        " does not fit matrix " + std::to_string(m.n_rows()) + "x" +
                        std::to_string(m.n_cols()));
}

void clamp_row(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, double alpha) {
    row = row.cwiseMax(-alpha).cwiseMin(alpha);
}

}  // namespace

void validate(const FitConfig& cfg) {
    if (cfg.r < 1 || !(cfg.alpha > 0) || !(cfg.step_size > 0) || cfg.n_epochs < 1 || cfg.batch < 1 ||
        !(cfg.tol > 0))
        throw Error(ErrorKind::InvalidParams, "fit config values must be positive");
}

double predict_prob(const OpinionEmbedding& emb, std::size_t i, std::size_t j, Sign s) {
    if (i >= static_cast<std::size_t>(emb.C.rows()) || j >= static_cast<std::size_t>(emb.V.rows()))
        throw Error(ErrorKind::IndexOutOfRange,
                    "(" + std::to_string(i) + ", " + std::to_string(j) + ")");
    const double dot = emb.C.row(static_cast<Eigen::Index>(i)).dot(emb.V.row(static_cast<Eigen::Index>(j)));
    return logistic_neg(-to_int(s) * dot);
}

double log_likelihood(const PartialSignMatrix& m, const OpinionEmbedding& emb) {
    check_shape(m, emb);
    double total = 0.0;
    for (const Entry& e : m.entries()) {
        const double dot = emb.C.row(static_cast<Eigen::Index>(e.row))
                               .dot(emb.V.row(static_cast<Eigen::Index>(e.col)));
        total -= softplus_neg(to_int(e.sign) * dot);
    }
    return total;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gradient(const PartialSignMatrix& m,
                                                     const OpinionEmbedding& emb) {
    check_shape(m, emb);
    Eigen::MatrixXd gC = Eigen::MatrixXd::Zero(emb.C.rows(), emb.C.cols());
    Eigen::MatrixXd gV = Eigen::MatrixXd::Zero(emb.V.rows(), emb.V.cols());
    for (const Entry& e : m.entries()) {
        const auto i = static_cast<Eigen::Index>(e.row);
        const auto j = static_cast<Eigen::Index>(e.col);
        const double s = to_int(e.sign);
        const double coef = s * logistic_neg(s * emb.C.row(i).dot(emb.V.row(j)));
        gC.row(i) += coef * emb.V.row(j);
        gV.row(j) += coef * emb.C.row(i);
    }
    return {std::move(gC), std::move(gV)};
}

Eigen::MatrixXd project_inf_norm(const Eigen::MatrixXd& M, double alpha) {
    if (!(alpha > 0)) throw Error(ErrorKind::InvalidParams, "alpha must be positive");
    return M.cwiseMax(-alpha).cwiseMin(alpha);
}

OpinionEmbedding fit(const PartialSignMatrix& m, const FitConfig& cfg) {
    validate(cfg);
    if (m.n_observed() == 0) throw Error(ErrorKind::EmptyMatrix, "no observed votes");
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> init(-0.1, 0.1);
    OpinionEmbedding start;
    start.alpha = cfg.alpha;
    start.C.resize(static_cast<Eigen::Index>(m.n_rows()), cfg.r);
    start.V.resize(static_cast<Eigen::Index>(m.n_cols()), cfg.r);
    for (Eigen::Index i = 0; i < start.C.size(); ++i) start.C.data()[i] = init(rng);
    for (Eigen::Index j = 0; j < start.V.size(); ++j) start.V.data()[j] = init(rng);
    return fit_from(m, cfg, std::move(start));
}

OpinionEmbedding fit_from(const PartialSignMatrix& m, const FitConfig& cfg, OpinionEmbedding start) {
    validate(cfg);
    if (m.n_observed() == 0) throw Error(ErrorKind::EmptyMatrix, "no observed votes");
    if (start.r() != cfg.r) throw Error(ErrorKind::DimensionMismatch, "start embedding has wrong r");
    check_shape(m, start);

    OpinionEmbedding cur = std::move(start);
    cur.alpha = cfg.alpha;
    cur.C = project_inf_norm(cur.C, cfg.alpha);
    cur.V = project_inf_norm(cur.V, cfg.alpha);

    const auto entries = m.entries();
    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, 1));

    OpinionEmbedding best = cur;
    double best_obj = log_likelihood(m, cur);
    const auto batch = static_cast<std::size_t>(cfg.batch);
    std::vector<Eigen::RowVectorXd> dC(batch, Eigen::RowVectorXd(cfg.r));
    std::vector<Eigen::RowVectorXd> dV(batch, Eigen::RowVectorXd(cfg.r));

    for (int epoch = 0; epoch < cfg.n_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t begin = 0; begin < order.size(); begin += batch) {
            const std::size_t end = std::min(order.size(), begin + batch);
            // Gradient at the pre-step iterate, then one simultaneous step.
            for (std::size_t k = begin; k < end; ++k) {
                const Entry& e = entries[order[k]];
                const auto i = static_cast<Eigen::Index>(e.row);
                const auto j = static_cast<Eigen::Index>(e.col);
                const double s = to_int(e.sign);
                const double coef = cfg.step_size * s * logistic_neg(s * cur.C.row(i).dot(cur.V.row(j)));
                dC[k - begin] = coef * cur.V.row(j);
                dV[k - begin] = coef * cur.C.row(i);
            }
            for (std::size_t k = begin; k < end; ++k) {
                const Entry& e = entries[order[k]];
                cur.C.row(static_cast<Eigen::Index>(e.row)) += dC[k - begin];
                cur.V.row(static_cast<Eigen::Index>(e.col)) += dV[k - begin];
            }
            for (std::size_t k = begin; k < end; ++k) {
                const Entry& e = entries[order[k]];
                clamp_row(cur.C.row(static_cast<Eigen::Index>(e.row)), cfg.alpha);
                clamp_row(cur.V.row(static_cast<Eigen::Index>(e.col)), cfg.alpha);
            }
        }
        const double obj = log_likelihood(m, cur);
        const double gain = (obj - best_obj) / std::max(std::abs(best_obj), 1e-12);
        if (obj > best_obj) {
            best_obj = obj;
            best = cur;
        }
        if (gain < cfg.tol) break;
    }
    return best;
}

}  // namespace signdim
