#include "signdim/analysis.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "signdim/error.hpp"
#include "signdim/io.hpp"
#include "signdim/random.hpp"
#include "signdim/serialize.hpp"

namespace signdim {

std::string_view to_string(DimensionMethod m) {
    switch (m) {
        case DimensionMethod::ExactRankOne: return "ExactRankOne";
        case DimensionMethod::FeasibilityWitness: return "FeasibilityWitness";
        case DimensionMethod::ScBound: return "ScBound";
    }
    return "Unknown";
}

std::string_view to_string(VoteModel m) { return m == VoteModel::DVM ? "DVM" : "PVM"; }

std::string_view to_string(SyntheticModel m) {
    return m == SyntheticModel::Deterministic ? "Deterministic" : "Probabilistic";
}

// ---------------------------------------------------------------------------

DimensionReport dimension_pipeline(const PartialSignMatrix& m, const PipelineConfig& config,
                                   std::string discussion_id) {
    DimensionReport report;
    report.discussion_id = std::move(discussion_id);

    if (auto w = is_rank_one(m)) {
        report.r_estimate = 1;
        report.method = DimensionMethod::ExactRankOne;
        report.exact = true;
        report.rank_one_witness = std::move(w);
        return report;
    }
    report.stages.push_back({FeasibilityStatus::InfeasibleCertified, FeasibilityMethod::RankOne, 1, {}, {}});

    // Exactness needs every smaller r refuted by an exact method.
    bool lower_certified = true;
    for (int r = 2; r <= config.max_exact; ++r) {
        FeasibilityConfig fc = config.feasibility;
        fc.seed = derive_seed(config.feasibility.seed, static_cast<std::uint64_t>(r));
        FeasibilityOutcome outcome = check_feasibility(m, r, fc);
        const FeasibilityStatus status = outcome.status;
        if (status == FeasibilityStatus::Feasible) {
            report.r_estimate = r;
            report.method = DimensionMethod::FeasibilityWitness;
            report.exact = lower_certified;
            report.witness = outcome.witness;
            report.stages.push_back(std::move(outcome));
            return report;
        }
        if (status == FeasibilityStatus::Unknown) lower_certified = false;
        report.stages.push_back(std::move(outcome));
    }

    BoundResult bound = estimate_dimension_upper_bound(m, config.bound);
    report.r_estimate = bound.r_hat;
    report.method = DimensionMethod::ScBound;
    // The bound is tight when every r below it was refuted exactly.
    bool tight = true;
    for (int r = 1; r < bound.r_hat; ++r) {
        const auto it = std::find_if(report.stages.begin(), report.stages.end(),
                                     [r](const FeasibilityOutcome& s) { return s.r == r; });
        if (it == report.stages.end() || it->status != FeasibilityStatus::InfeasibleCertified) {
            tight = false;
            break;
        }
    }
    report.exact = tight;
    report.bound = std::move(bound);
    return report;
}

// ---------------------------------------------------------------------------

double agreement(const Eigen::MatrixXd& C) {
    const Eigen::Index n = C.rows();
    if (n < 2) throw Error(ErrorKind::TooFewComments, "agreement needs at least two comments");
    std::size_t positive = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = i + 1; k < n; ++k)
            if (C.row(i).dot(C.row(k)) > 0.0) ++positive;
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    return static_cast<double>(positive) / pairs;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        if (std::isalnum(u)) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

double lexical_similarity(const std::vector<std::string>& comments) {
    if (comments.size() < 2) throw Error(ErrorKind::TooFewComments, "lexical similarity needs two comments");
    std::vector<std::set<std::string>> sets;
    sets.reserve(comments.size());
    for (const auto& c : comments) {
        auto tokens = tokenize(c);
        sets.emplace_back(tokens.begin(), tokens.end());
    }
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < sets.size(); ++a) {
        for (std::size_t b = a + 1; b < sets.size(); ++b, ++pairs) {
            if (sets[a].empty() && sets[b].empty()) {
                total += 1.0;
                continue;
            }
            std::size_t common = 0;
            for (const auto& t : sets[a]) common += sets[b].count(t);
            const std::size_t uni = sets[a].size() + sets[b].size() - common;
            total += static_cast<double>(common) / static_cast<double>(uni);
        }
    }
    return total / static_cast<double>(pairs);
}

// ---------------------------------------------------------------------------

PartialSignMatrix without_entry(const PartialSignMatrix& m, std::size_t row, std::size_t col) {
    std::vector<Entry> kept;
    kept.reserve(m.n_observed());
    for (const Entry& e : m.entries())
        if (e.row != row || e.col != col) kept.push_back(e);
    return PartialSignMatrix(m.n_rows(), m.n_cols(), std::move(kept), m.row_labels(), m.col_labels());
}

namespace {

std::vector<std::size_t> select_holdouts(const PartialSignMatrix& m, const LooConfig& cfg) {
    if (m.n_observed() < 2) throw Error(ErrorKind::TooFewVotes, "leave-one-out needs at least two votes");
    std::vector<std::size_t> idx(m.n_observed());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (idx.size() > cfg.max_holdouts) {
        Rng rng(derive_seed(cfg.seed, 0x4c4f4f));
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(cfg.max_holdouts);
        std::sort(idx.begin(), idx.end());
    }
    return idx;
}

struct Degrees {
    std::vector<std::size_t> row;
    std::vector<std::size_t> col;
};

Degrees degrees(const PartialSignMatrix& m) {
    Degrees d{std::vector<std::size_t>(m.n_rows(), 0), std::vector<std::size_t>(m.n_cols(), 0)};
    for (const Entry& e : m.entries()) {
        ++d.row[e.row];
        ++d.col[e.col];
    }
    return d;
}

void finish(LooResult& r) {
    r.accuracy = r.n_evaluated > 0 ? static_cast<double>(r.n_correct) / static_cast<double>(r.n_evaluated) : 0.0;
}

}  // namespace

LooResult leave_one_out(const PartialSignMatrix& m, const LooConfig& cfg) {
    const auto holdouts = select_holdouts(m, cfg);
    const Degrees deg = degrees(m);
    if (cfg.r < 1) throw Error(ErrorKind::InvalidParams, "leave-one-out needs r >= 1");

    FitConfig fit_cfg = cfg.fit;
    fit_cfg.r = cfg.r;
    std::optional<OpinionEmbedding> full_fit;
    if (cfg.model == VoteModel::PVM && cfg.warm_start) full_fit = fit(m, fit_cfg);

    LooResult result;
    const auto entries = m.entries();
    for (std::size_t k : holdouts) {
        const Entry& e = entries[k];
        if (deg.row[e.row] < 2 || deg.col[e.col] < 2) {
            ++result.skipped;
            continue;
        }
        const PartialSignMatrix rest = without_entry(m, e.row, e.col);
        const std::uint64_t seed = derive_seed(cfg.seed, k + 1);
        Direction predicted = Direction::Up;
        if (cfg.model == VoteModel::DVM) {
            const auto w = search_witness(rest, cfg.r, cfg.budget, seed);
            if (!w) {
                ++result.skipped;
                continue;
            }
            predicted = predict_deterministic(w->C.row(static_cast<Eigen::Index>(e.row)).transpose(),
                                              w->V.row(static_cast<Eigen::Index>(e.col)).transpose());
        } else {
            FitConfig c = fit_cfg;
            c.seed = seed;
            const OpinionEmbedding emb = full_fit ? fit_from(rest, c, *full_fit) : fit(rest, c);
            predicted = predict_prob(emb, e.row, e.col, Sign::Up) >= 0.5 ? Direction::Up : Direction::Down;
        }
        ++result.n_evaluated;
        if (sign_of(predicted) == e.sign) ++result.n_correct;
    }
    finish(result);
    return result;
}

LooResult majority_baseline(const PartialSignMatrix& m, const LooConfig& cfg) {
    const auto holdouts = select_holdouts(m, cfg);
    const Degrees deg = degrees(m);
    std::size_t ups = 0;
    for (const Entry& e : m.entries()) ups += e.sign == Sign::Up ? 1 : 0;
    const std::size_t total = m.n_observed();

    LooResult result;
    for (std::size_t k : holdouts) {
        const Entry& e = m.entries()[k];
        if (deg.row[e.row] < 2 || deg.col[e.col] < 2) {
            ++result.skipped;
            continue;
        }
        const std::size_t rest_ups = ups - (e.sign == Sign::Up ? 1 : 0);
        const std::size_t rest_downs = total - 1 - rest_ups;
        const Sign predicted = rest_ups >= rest_downs ? Sign::Up : Sign::Down;
        ++result.n_evaluated;
        if (predicted == e.sign) ++result.n_correct;
    }
    finish(result);
    return result;
}

// ---------------------------------------------------------------------------

std::pair<PartialSignMatrix, SyntheticGroundTruth> generate_synthetic(const SyntheticParams& p) {
    if (!(p.observe_prob > 0.0 && p.observe_prob <= 1.0) || p.r_true < 1 || p.n_comments == 0 ||
        p.n_voters == 0 || p.consensus < 0.0 || p.consensus > 1.0 || !(p.scale > 0.0))
        throw Error(ErrorKind::InvalidParams, "synthetic parameters out of range");

    Rng rng(p.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    SyntheticGroundTruth truth;
    truth.r_true = p.r_true;
    truth.model = p.model;
    truth.observe_prob = p.observe_prob;
    truth.seed = p.seed;
    truth.C_true.resize(static_cast<Eigen::Index>(p.n_comments), p.r_true);
    truth.V_true.resize(static_cast<Eigen::Index>(p.n_voters), p.r_true);
    auto draw = [&](Eigen::MatrixXd& M) {
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            for (Eigen::Index k = 0; k < M.cols(); ++k) {
                const double u = unit(rng);
                M(i, k) = p.scale * (k == 0 ? p.consensus + (1.0 - p.consensus) * u : u);
            }
    };
    draw(truth.C_true);
    draw(truth.V_true);

    const std::size_t n = p.n_comments;
    const std::size_t q = p.n_voters;
    std::vector<int> sign(n * q);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < q; ++j) {
            const double dot = truth.C_true.row(static_cast<Eigen::Index>(i))
                                   .dot(truth.V_true.row(static_cast<Eigen::Index>(j)));
            if (p.model == SyntheticModel::Deterministic) {
                sign[i * q + j] = dot >= 0.0 ? 1 : -1;
            } else {
                const double p_up = 1.0 / (1.0 + std::exp(-dot));
                sign[i * q + j] = coin(rng) < p_up ? 1 : -1;
            }
        }
    }

    std::vector<char> mask(n * q);
    for (auto& bit : mask) bit = coin(rng) < p.observe_prob ? 1 : 0;
    // Resampling an empty row or column only ever adds observations.
    for (std::size_t i = 0; i < n; ++i) {
        auto row_empty = [&] {
            for (std::size_t j = 0; j < q; ++j)
                if (mask[i * q + j]) return false;
            return true;
        };
        while (row_empty())
            for (std::size_t j = 0; j < q; ++j) mask[i * q + j] = coin(rng) < p.observe_prob ? 1 : 0;
    }
    for (std::size_t j = 0; j < q; ++j) {
        auto col_empty = [&] {
            for (std::size_t i = 0; i < n; ++i)
                if (mask[i * q + j]) return false;
            return true;
        };
        while (col_empty())
            for (std::size_t i = 0; i < n; ++i)
                if (coin(rng) < p.observe_prob) mask[i * q + j] = 1;
    }

    std::vector<Entry> entries;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < q; ++j)
            if (mask[i * q + j]) entries.push_back({i, j, sign[i * q + j] > 0 ? Sign::Up : Sign::Down});
    return {PartialSignMatrix(n, q, std::move(entries)), std::move(truth)};
}

std::vector<std::string> synthetic_comment_texts(const Eigen::MatrixXd& C, std::size_t words_per_comment,
                                                 std::uint64_t seed) {
    static constexpr std::array<std::string_view, 8> kStems{"market", "vote",  "team",  "price",
                                                            "policy", "coach", "stock", "media"};
    Rng rng(seed);
    std::vector<std::string> texts;
    texts.reserve(static_cast<std::size_t>(C.rows()));
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
        std::vector<double> weights(static_cast<std::size_t>(C.cols()));
        for (Eigen::Index k = 0; k < C.cols(); ++k) weights[static_cast<std::size_t>(k)] = std::abs(C(i, k)) + 1e-9;
        std::discrete_distribution<int> axis(weights.begin(), weights.end());
        std::uniform_int_distribution<int> variant(0, 5);
        std::string text;
        for (std::size_t w = 0; w < words_per_comment; ++w) {
            const int k = axis(rng);
            const bool positive = C(i, k) >= 0.0;
            if (!text.empty()) text.push_back(' ');
            text += std::string(kStems[static_cast<std::size_t>(k) % kStems.size()]) + std::to_string(k / 8) +
                    (positive ? "up" : "down") + std::to_string(variant(rng));
        }
        texts.push_back(std::move(text));
    }
    return texts;
}

// ---------------------------------------------------------------------------

nlohmann::json run_report(const PartialSignMatrix& raw, const ReportConfig& config,
                          const std::string& discussion_id, const std::vector<std::string>* comment_texts) {
    const auto pruned = prune(raw, config.min_comments);
    if (!pruned)
        throw Error(ErrorKind::PrecondViolated,
                    "discussion '" + discussion_id + "' has fewer than " + std::to_string(config.min_comments) +
                        " comments with votes");
    const PartialSignMatrix& m = *pruned;

    json report{{"schema_version", kReportSchemaVersion},
                {"discussion_id", discussion_id},
                {"n_comments", m.n_rows()},
                {"n_voters", m.n_cols()},
                {"raw_shape", {raw.n_rows(), raw.n_cols()}}};
    const MatrixStats st = stats(m);
    report["stats"] = to_json(st);

    const DimensionReport dim = dimension_pipeline(m, config.pipeline, discussion_id);
    report["dimension"] = to_json(dim);

    if (config.embed) {
        FitConfig fc = config.fit;
        if (fc.r <= 0) fc.r = dim.r_estimate;
        const OpinionEmbedding emb = fit(m, fc);
        json e{{"r", emb.r()}, {"alpha", emb.alpha}, {"final_objective", log_likelihood(m, emb)}};
        e["agreement"] = m.n_rows() >= 2 ? json(agreement(emb)) : json(nullptr);
        report["embedding"] = std::move(e);
    }

    if (comment_texts != nullptr) {
        // Align texts with the surviving rows by comment id.
        std::vector<std::string> aligned;
        for (const auto& label : m.row_labels()) {
            const auto it = std::find(raw.row_labels().begin(), raw.row_labels().end(), label);
            const auto idx = static_cast<std::size_t>(it - raw.row_labels().begin());
            aligned.push_back(idx < comment_texts->size() ? (*comment_texts)[idx] : std::string());
        }
        report["lexical_similarity"] = aligned.size() >= 2 ? json(lexical_similarity(aligned)) : json(nullptr);
    } else {
        report["lexical_similarity"] = nullptr;
    }

    if (config.run_loo && m.n_observed() >= 2) {
        LooConfig lc = config.loo;
        if (lc.r <= 0) lc.r = dim.r_estimate;
        const LooResult loo = leave_one_out(m, lc);
        json lj = to_json(loo);
        lj["model"] = to_string(lc.model);
        lj["r"] = lc.r;
        lj["baseline_majority"] = to_json(majority_baseline(m, lc));
        report["loo"] = std::move(lj);
        report["pattern_accuracy"] = {st.n_unique_patterns, loo.accuracy};
    }
    return report;
}

nlohmann::json run_report(const std::filesystem::path& input, const ReportConfig& config) {
    const auto votes = io::load_votes(input);
    const PartialSignMatrix raw = from_vote_triplets(votes);
    std::vector<std::string> texts;
    const std::vector<std::string>* text_ptr = nullptr;
    if (config.texts) {
        const auto by_id = io::read_comment_texts(*config.texts);
        for (const auto& label : raw.row_labels()) {
            const auto it = by_id.find(label);
            texts.push_back(it == by_id.end() ? std::string() : it->second);
        }
        text_ptr = &texts;
    }
    return run_report(raw, config, input.stem().string(), text_ptr);
}

}  // namespace signdim
