#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "signdim/analysis.hpp"
#include "signdim/config.hpp"
#include "signdim/error.hpp"
#include "signdim/feasibility.hpp"
#include "signdim/io.hpp"
#include "signdim/mle_embed.hpp"
#include "signdim/random.hpp"
#include "signdim/rank_one.hpp"
#include "signdim/sc_bound.hpp"
#include "signdim/serialize.hpp"
#include "signdim/sign_matrix.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace signdim;

namespace {

constexpr int kExitIo = 2;
constexpr int kExitParse = 3;
constexpr int kExitPrecondition = 4;
constexpr int kExitOther = 1;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io: return kExitIo;
        case ErrorKind::ParseError:
        case ErrorKind::ConflictingVote: return kExitParse;
        case ErrorKind::EmptyMatrix:
        case ErrorKind::PrecondViolated:
        case ErrorKind::TooFewComments:
        case ErrorKind::TooFewVotes:
        case ErrorKind::InvalidParams:
        case ErrorKind::DimensionMismatch:
        case ErrorKind::IndexOutOfRange:
        case ErrorKind::InvalidModel:
        case ErrorKind::TooLarge: return kExitPrecondition;
    }
    return kExitOther;
}

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> config_path;
    std::optional<std::string> output;
    json config = json::object();
};

void emit(const Globals& g, const std::string& text) {
    if (g.output) {
        io::write_file(*g.output, text);
    } else {
        std::cout << text;
        std::cout.flush();
    }
}

void emit(const Globals& g, const json& doc) { emit(g, doc.dump(2) + "\n"); }

PartialSignMatrix load_matrix(const std::string& path) {
    const auto votes = io::load_votes(path);
    return from_vote_triplets(votes);
}

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    return io::read_file(path);
}

template <typename T>
void override_with(const std::optional<T>& flag, T& target) {
    if (flag) target = *flag;
}

std::optional<std::string> resolve_solver(const std::optional<std::string>& flag) {
    if (!flag) return std::nullopt;
    if (*flag == "auto") return detect_solver();
    if (*flag == "none") return std::nullopt;
    return *flag;
}

VoteModel parse_vote_model(const std::string& s) {
    if (s == "dvm") return VoteModel::DVM;
    if (s == "pvm") return VoteModel::PVM;
    throw Error(ErrorKind::InvalidParams, "model must be dvm or pvm");
}

// Ids are accepted as labels first, then as plain indices.
std::size_t resolve_index(const std::string& id, const std::vector<std::string>& labels, std::size_t n) {
    const auto it = std::find(labels.begin(), labels.end(), id);
    if (it != labels.end()) return static_cast<std::size_t>(it - labels.begin());
    std::size_t idx = 0;
    const auto [p, ec] = std::from_chars(id.data(), id.data() + id.size(), idx);
    if (ec != std::errc() || p != id.data() + id.size() || idx >= n)
        throw Error(ErrorKind::IndexOutOfRange, "unknown id '" + id + "'");
    return idx;
}

json analyze_one(const fs::path& input, ReportConfig cfg) {
    const fs::path sidecar = input.parent_path() / (input.stem().string() + ".texts.csv");
    if (!cfg.texts && fs::exists(sidecar)) cfg.texts = sidecar;
    return run_report(input, cfg);
}

int run_batch(const Globals& g, const fs::path& dir, const ReportConfig& cfg) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "not a directory: " + dir.string());
    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto& p = entry.path();
        const std::string name = p.filename().string();
        if (name.ends_with(".texts.csv")) continue;
        if (p.extension() == ".csv" || p.extension() == ".json") inputs.push_back(p);
    }
    std::sort(inputs.begin(), inputs.end());

    struct Outcome {
        json doc;
        int code = 0;
    };
    auto work = [&cfg](const fs::path& p) {
        try {
            return Outcome{analyze_one(p, cfg), 0};
        } catch (const Error& e) {
            return Outcome{json{{"discussion_id", p.stem().string()},
                                {"error", std::string(to_string(e.kind()))},
                                {"message", e.what()}},
                           exit_code(e.kind())};
        }
    };

    const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
    std::vector<Outcome> results(inputs.size());
    for (std::size_t begin = 0; begin < inputs.size(); begin += width) {
        const std::size_t end = std::min(inputs.size(), begin + width);
        std::vector<std::future<Outcome>> pending;
        for (std::size_t k = begin; k < end; ++k) pending.push_back(std::async(std::launch::async, work, inputs[k]));
        for (std::size_t k = begin; k < end; ++k) results[k] = pending[k - begin].get();
    }

    std::string lines;
    int code = 0;
    for (const auto& r : results) {
        lines += r.doc.dump() + "\n";
        if (code == 0) code = r.code;
    }
    emit(g, lines);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"signdim: opinion-space dimension and embeddings from discussion votes"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Master seed for every randomized step");
    app.add_option("--config", g.config_path, "Config file (.json or flat TOML)");
    app.add_option("-o,--output", g.output, "Write the result here instead of stdout");

    std::string input;
    auto add_input = [&input](CLI::App* sub) { sub->add_option("-i,--input", input, "Votes CSV or JSON")->required(); };

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse votes and print the matrix with statistics");
    add_input(ingest);
    std::size_t ingest_min_comments = 1;
    ingest->add_option("--min-comments", ingest_min_comments, "Prune threshold on comment count");

    // dim
    auto* dim = app.add_subcommand("dim", "Estimate the opinion-space dimension");
    add_input(dim);
    std::optional<int> max_exact;
    std::optional<std::string> solver;
    dim->add_option("--max-exact", max_exact, "Highest r tried by feasibility before the bound");
    dim->add_option("--solver", solver, "SMT solver command, 'auto' or 'none'");

    // bound
    auto* bound = app.add_subcommand("bound", "Spanning-tree upper bound on the dimension");
    add_input(bound);
    std::optional<std::size_t> sources;
    bound->add_option("--sources", sources, "Sampled walk sources for large matrices");

    // feas
    auto* feas = app.add_subcommand("feas", "Check feasibility at a fixed dimension");
    add_input(feas);
    int feas_r = 2;
    std::optional<int> budget;
    std::optional<std::string> model_path;
    feas->add_option("--r", feas_r, "Dimension")->required();
    feas->add_option("--budget", budget, "Witness-search restarts");
    feas->add_option("--model", model_path, "Validate an SMT model from a file or '-' for stdin");
    feas->add_option("--solver", solver, "SMT solver command, 'auto' or 'none'");

    // export-smt
    auto* smt = app.add_subcommand("export-smt", "Write the feasibility constraints as SMT-LIB");
    add_input(smt);
    int smt_r = 2;
    smt->add_option("--r", smt_r, "Dimension")->required();

    // embed
    auto* embed = app.add_subcommand("embed", "Fit probabilistic-model embeddings");
    add_input(embed);
    std::optional<int> embed_r;
    std::optional<double> alpha;
    std::optional<int> epochs;
    embed->add_option("--r", embed_r, "Latent dimension");
    embed->add_option("--alpha", alpha, "Infinity-norm bound");
    embed->add_option("--epochs", epochs, "Maximum epochs");

    // predict
    auto* predict = app.add_subcommand("predict", "Predict a vote from a fitted embedding");
    std::string embedding_path;
    std::string comment_id;
    std::string voter_id;
    predict->add_option("--embedding", embedding_path, "Embedding JSON from 'embed'")->required();
    predict->add_option("--comment", comment_id, "Comment id or row index")->required();
    predict->add_option("--voter", voter_id, "Voter id or column index")->required();

    // loo
    auto* loo = app.add_subcommand("loo", "Leave-one-out vote prediction accuracy");
    add_input(loo);
    std::optional<std::string> loo_model;
    std::optional<int> loo_r;
    std::optional<std::size_t> max_holdouts;
    std::string baseline;
    loo->add_option("--model", loo_model, "dvm or pvm")->check(CLI::IsMember({"dvm", "pvm"}));
    loo->add_option("--r", loo_r, "Latent dimension");
    loo->add_option("--max-holdouts", max_holdouts, "Cap on held-out votes");
    loo->add_option("--alpha", alpha, "Infinity-norm bound for PVM refits");
    loo->add_option("--epochs", epochs, "Maximum epochs for PVM refits");
    loo->add_option("--baseline", baseline, "Also report a baseline")->check(CLI::IsMember({"majority"}));

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Full JSON report for one discussion or a directory");
    std::optional<std::string> analyze_input;
    std::optional<std::string> batch_dir;
    std::optional<std::string> text_path;
    std::optional<std::size_t> min_comments;
    bool with_loo = false;
    bool no_embed = false;
    auto* in_opt = analyze->add_option("-i,--input", analyze_input, "Votes CSV or JSON");
    auto* batch_opt = analyze->add_option("--batch-dir", batch_dir, "Directory of vote files; emits JSON lines");
    in_opt->excludes(batch_opt);
    analyze->add_option("--text", text_path, "Comment text sidecar CSV comment_id,text");
    analyze->add_option("--min-comments", min_comments, "Prune threshold on comment count");
    analyze->add_option("--max-exact", max_exact, "Highest r tried by feasibility before the bound");
    analyze->add_option("--solver", solver, "SMT solver command, 'auto' or 'none'");
    analyze->add_flag("--loo", with_loo, "Include leave-one-out accuracy");
    analyze->add_flag("--no-embed", no_embed, "Skip the embedding fit");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic discussion");
    std::optional<std::size_t> n_comments;
    std::optional<std::size_t> n_voters;
    std::optional<int> r_true;
    std::optional<std::string> sim_model;
    std::optional<double> observe_prob;
    std::optional<double> consensus;
    std::optional<double> scale;
    std::optional<std::string> truth_path;
    std::optional<std::string> texts_out;
    simulate->add_option("--comments", n_comments, "Number of comments");
    simulate->add_option("--voters", n_voters, "Number of voters");
    simulate->add_option("--r-true", r_true, "Planted dimension");
    simulate->add_option("--model", sim_model, "deterministic or probabilistic")
        ->check(CLI::IsMember({"deterministic", "probabilistic"}));
    simulate->add_option("--observe-prob", observe_prob, "Probability that a vote is observed");
    simulate->add_option("--consensus", consensus, "Shift of the first latent coordinate towards +1");
    simulate->add_option("--scale", scale, "Multiplier on every planted coordinate");
    simulate->add_option("--truth", truth_path, "Write the planted embedding as JSON");
    simulate->add_option("--texts", texts_out, "Write a synthetic comment_id,text sidecar");

    CLI11_PARSE(app, argc, argv);

    try {
        if (g.config_path) g.config = load_config(*g.config_path);
        json& cfg = g.config;
        if (g.seed) cfg["seed"] = *g.seed;

        if (ingest->parsed()) {
            const PartialSignMatrix raw = load_matrix(input);
            const auto pruned = prune(raw, ingest_min_comments);
            if (!pruned) throw Error(ErrorKind::PrecondViolated, "nothing left after pruning");
            json doc = io::matrix_to_json(*pruned);
            doc["stats"] = to_json(stats(*pruned));
            emit(g, doc);
            return 0;
        }

        if (dim->parsed()) {
            PipelineConfig pc;
            apply_config(cfg, pc);
            override_with(max_exact, pc.max_exact);
            if (solver) pc.feasibility.solver_command = resolve_solver(solver);
            const PartialSignMatrix m = load_matrix(input);
            emit(g, to_json(dimension_pipeline(m, pc, fs::path(input).stem().string())));
            return 0;
        }

        if (bound->parsed()) {
            BoundConfig bc;
            apply_config(cfg, bc);
            override_with(sources, bc.n_sources);
            emit(g, to_json(estimate_dimension_upper_bound(load_matrix(input), bc)));
            return 0;
        }

        if (feas->parsed()) {
            const PartialSignMatrix m = load_matrix(input);
            if (model_path) {
                const Witness w = parse_smt_model(read_input(*model_path), m, feas_r);
                FeasibilityOutcome out{FeasibilityStatus::Feasible, FeasibilityMethod::ExternalSolver, feas_r, w, {}};
                emit(g, to_json(out));
                return 0;
            }
            FeasibilityConfig fc;
            apply_config(cfg, fc);
            override_with(budget, fc.budget.restarts);
            if (solver) fc.solver_command = resolve_solver(solver);
            emit(g, to_json(check_feasibility(m, feas_r, fc)));
            return 0;
        }

        if (smt->parsed()) {
            emit(g, emit_smt_constraints(load_matrix(input), smt_r));
            return 0;
        }

        if (embed->parsed()) {
            FitConfig fc;
            apply_config(cfg, fc);
            override_with(embed_r, fc.r);
            override_with(alpha, fc.alpha);
            override_with(epochs, fc.n_epochs);
            const PartialSignMatrix m = load_matrix(input);
            const OpinionEmbedding emb = fit(m, fc);
            emit(g, to_json(emb, log_likelihood(m, emb), &m.row_labels(), &m.col_labels()));
            return 0;
        }

        if (predict->parsed()) {
            json doc;
            try {
                doc = json::parse(read_input(embedding_path));
            } catch (const json::exception& e) {
                throw Error(ErrorKind::ParseError, e.what());
            }
            const OpinionEmbedding emb = embedding_from_json(doc);
            const auto rows = doc.value("row_labels", std::vector<std::string>{});
            const auto cols = doc.value("col_labels", std::vector<std::string>{});
            const std::size_t i = resolve_index(comment_id, rows, static_cast<std::size_t>(emb.C.rows()));
            const std::size_t j = resolve_index(voter_id, cols, static_cast<std::size_t>(emb.V.rows()));
            const double p_up = predict_prob(emb, i, j, Sign::Up);
            const Direction d = predict_deterministic(emb.C.row(static_cast<Eigen::Index>(i)).transpose(),
                                                      emb.V.row(static_cast<Eigen::Index>(j)).transpose());
            emit(g, json{{"comment", comment_id},
                         {"voter", voter_id},
                         {"p_up", p_up},
                         {"pvm", p_up >= 0.5 ? "up" : "down"},
                         {"dvm", d == Direction::Up ? "up" : "down"}});
            return 0;
        }

        if (loo->parsed()) {
            LooConfig lc;
            apply_config(cfg, lc);
            if (loo_model) lc.model = parse_vote_model(*loo_model);
            override_with(loo_r, lc.r);
            override_with(max_holdouts, lc.max_holdouts);
            override_with(alpha, lc.fit.alpha);
            override_with(epochs, lc.fit.n_epochs);
            const PartialSignMatrix m = load_matrix(input);
            json doc = to_json(leave_one_out(m, lc));
            doc["model"] = to_string(lc.model);
            doc["r"] = lc.r;
            if (baseline == "majority") doc["baseline_majority"] = to_json(majority_baseline(m, lc));
            emit(g, doc);
            return 0;
        }

        if (analyze->parsed()) {
            ReportConfig rc;
            apply_config(cfg, rc);
            override_with(min_comments, rc.min_comments);
            override_with(max_exact, rc.pipeline.max_exact);
            if (solver) rc.pipeline.feasibility.solver_command = resolve_solver(solver);
            if (with_loo) rc.run_loo = true;
            if (no_embed) rc.embed = false;
            if (text_path) rc.texts = fs::path(*text_path);
            if (batch_dir) return run_batch(g, *batch_dir, rc);
            if (!analyze_input) throw Error(ErrorKind::InvalidParams, "analyze needs --input or --batch-dir");
            emit(g, analyze_one(*analyze_input, rc));
            return 0;
        }

        if (simulate->parsed()) {
            SyntheticParams sp;
            apply_config(cfg, sp);
            override_with(n_comments, sp.n_comments);
            override_with(n_voters, sp.n_voters);
            override_with(r_true, sp.r_true);
            override_with(observe_prob, sp.observe_prob);
            override_with(consensus, sp.consensus);
            override_with(scale, sp.scale);
            if (sim_model)
                sp.model = *sim_model == "probabilistic" ? SyntheticModel::Probabilistic : SyntheticModel::Deterministic;
            const auto [m, truth] = generate_synthetic(sp);
            std::ostringstream csv;
            io::write_votes_csv(csv, m);
            emit(g, csv.str());
            if (truth_path) {
                const json t{{"r_true", truth.r_true},
                             {"model", to_string(truth.model)},
                             {"observe_prob", truth.observe_prob},
                             {"seed", truth.seed},
                             {"C", matrix_rows_json(truth.C_true)},
                             {"V", matrix_rows_json(truth.V_true)}};
                io::write_file(*truth_path, t.dump(2) + "\n");
            }
            if (texts_out) {
                const auto texts = synthetic_comment_texts(truth.C_true, 12, derive_seed(sp.seed, 7));
                std::ostringstream out;
                out << "comment_id,text\n";
                for (std::size_t i = 0; i < texts.size(); ++i) out << m.row_labels()[i] << ',' << texts[i] << '\n';
                io::write_file(*texts_out, out.str());
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "signdim: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "signdim: " << e.what() << '\n';
        return kExitOther;
    }
    return kExitOther;
}
