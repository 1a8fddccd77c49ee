#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "signdim/analysis.hpp"
#include "signdim/error.hpp"
#include "signdim/feasibility.hpp"
#include "signdim/io.hpp"
#include "signdim/mle_embed.hpp"
#include "signdim/rank_one.hpp"
#include "signdim/sc_bound.hpp"
#include "signdim/serialize.hpp"

namespace py = pybind11;
using namespace signdim;

namespace {

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

Direction parse_direction(const std::string& s) {
    if (s == "up" || s == "+1" || s == "1") return Direction::Up;
    if (s == "down" || s == "-1") return Direction::Down;
    throw Error(ErrorKind::ParseError, "vote must be 'up' or 'down', got '" + s + "'");
}

std::optional<std::string> resolve_solver(const std::optional<std::string>& solver) {
    if (!solver || *solver == "none") return std::nullopt;
    if (*solver == "auto") return detect_solver();
    return solver;
}

VoteModel parse_vote_model(const std::string& s) {
    if (s == "pvm") return VoteModel::PVM;
    if (s == "dvm") return VoteModel::DVM;
    throw Error(ErrorKind::InvalidParams, "model must be 'pvm' or 'dvm'");
}

}  // namespace

PYBIND11_MODULE(_signdim, m) {
    m.doc() = "Sign-rank dimension estimates and opinion embeddings for vote matrices";

    py::register_exception<Error>(m, "SigndimError", PyExc_RuntimeError);

    py::class_<PartialSignMatrix>(m, "SignMatrix")
        .def(py::init([](const std::vector<std::vector<int>>& cells) {
                 return PartialSignMatrix::from_dense(cells);
             }),
             py::arg("cells"), "Dense rows of +1 / -1 with 0 for unknown.")
        .def_static(
            "from_votes",
            [](const std::vector<std::tuple<std::string, std::string, std::string>>& votes) {
                std::vector<Vote> records;
                records.reserve(votes.size());
                for (const auto& [c, v, d] : votes) records.push_back({c, v, parse_direction(d)});
                return from_vote_triplets(records);
            },
            py::arg("votes"), "(comment_id, voter_id, 'up'|'down') triples.")
        .def_static(
            "load", [](const std::filesystem::path& path) { return from_vote_triplets(io::load_votes(path)); },
            py::arg("path"))
        .def_property_readonly("n_rows", &PartialSignMatrix::n_rows)
        .def_property_readonly("n_cols", &PartialSignMatrix::n_cols)
        .def_property_readonly("n_observed", &PartialSignMatrix::n_observed)
        .def_property_readonly("row_labels", &PartialSignMatrix::row_labels)
        .def_property_readonly("col_labels", &PartialSignMatrix::col_labels)
        .def("to_dense", &PartialSignMatrix::to_dense)
        .def("transpose", [](const PartialSignMatrix& self) { return transpose(self); })
        .def("prune", [](const PartialSignMatrix& self, std::size_t min_comments) { return prune(self, min_comments); },
             py::arg("min_comments") = 1)
        .def("stats", [](const PartialSignMatrix& self) { return to_python(to_json(stats(self))); })
        .def("__eq__", [](const PartialSignMatrix& a, const PartialSignMatrix& b) { return a == b; })
        .def("__repr__", [](const PartialSignMatrix& self) {
            return "<SignMatrix " + std::to_string(self.n_rows()) + "x" + std::to_string(self.n_cols()) + ", " +
                   std::to_string(self.n_observed()) + " votes>";
        });

    py::class_<OpinionEmbedding>(m, "Embedding")
        .def(py::init([](Eigen::MatrixXd C, Eigen::MatrixXd V, double alpha) {
                 return OpinionEmbedding{std::move(C), std::move(V), alpha};
             }),
             py::arg("C"), py::arg("V"), py::arg("alpha") = 10.0)
        .def_readwrite("C", &OpinionEmbedding::C)
        .def_readwrite("V", &OpinionEmbedding::V)
        .def_readwrite("alpha", &OpinionEmbedding::alpha)
        .def_property_readonly("r", &OpinionEmbedding::r)
        .def(
            "predict_prob",
            [](const OpinionEmbedding& e, std::size_t i, std::size_t j, bool up) {
                return predict_prob(e, i, j, up ? Sign::Up : Sign::Down);
            },
            py::arg("comment"), py::arg("voter"), py::arg("up") = true)
        .def("log_likelihood", [](const OpinionEmbedding& e, const PartialSignMatrix& s) { return log_likelihood(s, e); })
        .def("gradient", [](const OpinionEmbedding& e, const PartialSignMatrix& s) { return gradient(s, e); })
        .def("agreement", [](const OpinionEmbedding& e) { return agreement(e); });

    m.def(
        "is_rank_one",
        [](const PartialSignMatrix& s) -> std::optional<std::pair<std::vector<int>, std::vector<int>>> {
            auto w = is_rank_one(s);
            if (!w) return std::nullopt;
            return std::make_pair(w->comment_signs, w->voter_signs);
        },
        py::arg("matrix"), "Comment and voter signs when the matrix has sign-rank 1, else None.");

    m.def(
        "upper_bound",
        [](const PartialSignMatrix& s, std::uint64_t seed, std::size_t n_sources, bool try_transpose) {
            BoundConfig cfg;
            cfg.seed = seed;
            cfg.n_sources = n_sources;
            cfg.try_transpose = try_transpose;
            return to_python(to_json(estimate_dimension_upper_bound(s, cfg)));
        },
        py::arg("matrix"), py::arg("seed") = 0, py::arg("n_sources") = 32, py::arg("try_transpose") = true);

    m.def(
        "dimension",
        [](const PartialSignMatrix& s, int max_exact, std::optional<std::string> solver, std::uint64_t seed) {
            PipelineConfig cfg;
            cfg.max_exact = max_exact;
            cfg.feasibility.solver_command = resolve_solver(solver);
            cfg.feasibility.seed = seed;
            cfg.bound.seed = seed;
            return to_python(to_json(dimension_pipeline(s, cfg)));
        },
        py::arg("matrix"), py::arg("max_exact") = 3, py::arg("solver") = py::none(), py::arg("seed") = 0,
        "solver: None or 'none', 'auto', or a command such as 'z3 -smt2'.");

    m.def(
        "search_witness",
        [](const PartialSignMatrix& s, int r, int restarts, int sweeps,
           std::uint64_t seed) -> std::optional<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> {
            auto w = search_witness(s, r, SearchBudget{restarts, sweeps}, seed);
            if (!w) return std::nullopt;
            return std::make_pair(std::move(w->C), std::move(w->V));
        },
        py::arg("matrix"), py::arg("r"), py::arg("restarts") = 20, py::arg("sweeps") = 300, py::arg("seed") = 0);

    m.def(
        "validates",
        [](const PartialSignMatrix& s, Eigen::MatrixXd C, Eigen::MatrixXd V) {
            return validates(Witness{std::move(C), std::move(V)}, s);
        },
        py::arg("matrix"), py::arg("C"), py::arg("V"));

    m.def("smt_constraints", &emit_smt_constraints, py::arg("matrix"), py::arg("r"));

    m.def(
        "fit",
        [](const PartialSignMatrix& s, int r, double alpha, double step_size, int epochs, int batch,
           std::uint64_t seed, double tol) {
            return fit(s, FitConfig{r, alpha, step_size, epochs, batch, seed, tol});
        },
        py::arg("matrix"), py::arg("r") = 2, py::arg("alpha") = 10.0, py::arg("step_size") = 0.05,
        py::arg("epochs") = 500, py::arg("batch") = 64, py::arg("seed") = 0, py::arg("tol") = 1e-6);

    m.def("agreement", py::overload_cast<const Eigen::MatrixXd&>(&agreement), py::arg("C"));
    m.def("tokenize", &tokenize, py::arg("text"));
    m.def("lexical_similarity", &lexical_similarity, py::arg("comments"));

    m.def(
        "leave_one_out",
        [](const PartialSignMatrix& s, const std::string& model, int r, std::size_t max_holdouts,
           std::uint64_t seed, bool warm_start, int epochs, double alpha) {
            LooConfig cfg;
            cfg.model = parse_vote_model(model);
            cfg.r = r;
            cfg.max_holdouts = max_holdouts;
            cfg.seed = seed;
            cfg.warm_start = warm_start;
            cfg.fit.n_epochs = epochs;
            cfg.fit.alpha = alpha;
            return to_python(to_json(leave_one_out(s, cfg)));
        },
        py::arg("matrix"), py::arg("model") = "pvm", py::arg("r") = 2, py::arg("max_holdouts") = 500,
        py::arg("seed") = 0, py::arg("warm_start") = false, py::arg("epochs") = 500, py::arg("alpha") = 10.0);

    m.def(
        "generate_synthetic",
        [](std::size_t comments, std::size_t voters, int r_true, const std::string& model, double observe_prob,
           double consensus, double scale, std::uint64_t seed) {
            SyntheticParams p;
            p.n_comments = comments;
            p.n_voters = voters;
            p.r_true = r_true;
            if (model == "probabilistic")
                p.model = SyntheticModel::Probabilistic;
            else if (model != "deterministic")
                throw Error(ErrorKind::InvalidParams, "model must be 'deterministic' or 'probabilistic'");
            p.observe_prob = observe_prob;
            p.consensus = consensus;
            p.scale = scale;
            p.seed = seed;
            auto [mat, truth] = generate_synthetic(p);
            return std::make_tuple(std::move(mat), std::move(truth.C_true), std::move(truth.V_true));
        },
        py::arg("comments") = 20, py::arg("voters") = 20, py::arg("r_true") = 2, py::arg("model") = "deterministic",
        py::arg("observe_prob") = 1.0, py::arg("consensus") = 0.0, py::arg("scale") = 1.0, py::arg("seed") = 0,
        "Returns (matrix, C_true, V_true).");

    m.def(
        "analyze",
        [](const PartialSignMatrix& s, const std::string& discussion_id, std::optional<std::vector<std::string>> texts,
           int max_exact, bool run_loo, std::uint64_t seed) {
            ReportConfig cfg;
            cfg.pipeline.max_exact = max_exact;
            cfg.pipeline.feasibility.seed = seed;
            cfg.pipeline.bound.seed = seed;
            cfg.fit.seed = seed;
            cfg.run_loo = run_loo;
            cfg.loo.seed = seed;
            return to_python(run_report(s, cfg, discussion_id, texts ? &*texts : nullptr));
        },
        py::arg("matrix"), py::arg("discussion_id") = "", py::arg("texts") = py::none(), py::arg("max_exact") = 3,
        py::arg("run_loo") = false, py::arg("seed") = 0, "Full JSON report as a dict.");
}
