#include "signdim/feasibility.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <variant>

#include <unistd.h>

#include "signdim/error.hpp"
#include "signdim/random.hpp"
#include "signdim/rank_one.hpp"

namespace signdim {

std::string_view to_string(FeasibilityStatus s) {
    switch (s) {
        case FeasibilityStatus::Feasible: return "Feasible";
        case FeasibilityStatus::InfeasibleCertified: return "InfeasibleCertified";
        case FeasibilityStatus::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::string_view to_string(FeasibilityMethod m) {
    switch (m) {
        case FeasibilityMethod::RankOne: return "RankOne";
        case FeasibilityMethod::WitnessSearch: return "WitnessSearch";
        case FeasibilityMethod::ExternalSolver: return "ExternalSolver";
        case FeasibilityMethod::BruteForce: return "BruteForce";
    }
    return "Unknown";
}

Direction predict_deterministic(const Eigen::Ref<const Eigen::VectorXd>& c,
                                const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (c.size() != v.size())
        throw Error(ErrorKind::DimensionMismatch,
                    std::to_string(c.size()) + " vs " + std::to_string(v.size()));
    return c.dot(v) >= 0.0 ? Direction::Up : Direction::Down;
}

std::size_t count_violations(const Witness& w, const PartialSignMatrix& m) {
    if (static_cast<std::size_t>(w.C.rows()) != m.n_rows() ||
        static_cast<std::size_t>(w.V.rows()) != m.n_cols() || w.C.cols() != w.V.cols())
        throw Error(ErrorKind::DimensionMismatch, "witness shape does not match matrix");
    std::size_t bad = 0;
    for (const Entry& e : m.entries()) {
        const double dot = w.C.row(static_cast<Eigen::Index>(e.row))
                               .dot(w.V.row(static_cast<Eigen::Index>(e.col)));
        if (!(to_int(e.sign) * dot > 0.0)) ++bad;
    }
    return bad;
}

bool validates(const Witness& w, const PartialSignMatrix& m) { return count_violations(w, m) == 0; }

// ---------------------------------------------------------------------------
// SMT-LIB export and model parsing

std::string emit_smt_constraints(const PartialSignMatrix& m, int r) {
    if (r < 1) throw Error(ErrorKind::InvalidParams, "r must be >= 1");
    if (m.n_observed() == 0) throw Error(ErrorKind::EmptyMatrix, "no observed votes");
    std::ostringstream out;
    out << "; sign feasibility: " << m.n_rows() << " comments x " << m.n_cols()
        << " voters, r = " << r << "\n";
    out << "(set-option :produce-models true)\n(set-logic QF_NRA)\n";
    for (std::size_t i = 0; i < m.n_rows(); ++i)
        for (int k = 0; k < r; ++k) out << "(declare-fun c_" << i << '_' << k << " () Real)\n";
    for (std::size_t j = 0; j < m.n_cols(); ++j)
        for (int k = 0; k < r; ++k) out << "(declare-fun v_" << j << '_' << k << " () Real)\n";
    for (const Entry& e : m.entries()) {
        std::ostringstream sum;
        if (r > 1) sum << "(+";
        for (int k = 0; k < r; ++k) {
            if (r > 1) sum << ' ';
            sum << "(* c_" << e.row << '_' << k << " v_" << e.col << '_' << k << ')';
        }
        if (r > 1) sum << ')';
        out << "(assert (" << (e.sign == Sign::Up ? '>' : '<') << ' ' << sum.str() << " 0.0))\n";
    }
    out << "(check-sat)\n(get-model)\n(exit)\n";
    return out.str();
}

namespace {

struct SExpr {
    std::variant<std::string, std::vector<SExpr>> node;

    bool is_atom() const { return std::holds_alternative<std::string>(node); }
    const std::string& atom() const { return std::get<std::string>(node); }
    const std::vector<SExpr>& list() const { return std::get<std::vector<SExpr>>(node); }
};

class SExprReader {
public:
    explicit SExprReader(std::string_view text) : text_(text) {}

    std::vector<SExpr> read_all() {
        std::vector<SExpr> out;
        while (skip_space(), pos_ < text_.size()) out.push_back(read());
        return out;
    }

private:
    void skip_space() {
        while (pos_ < text_.size()) {
            const char ch = text_[pos_];
            if (ch == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    SExpr read() {
        skip_space();
        if (pos_ >= text_.size()) throw Error(ErrorKind::ParseError, "unexpected end of model");
        if (text_[pos_] == ')') throw Error(ErrorKind::ParseError, "unbalanced ')'");
        if (text_[pos_] == '(') {
            ++pos_;
            std::vector<SExpr> items;
            while (true) {
                skip_space();
                if (pos_ >= text_.size()) throw Error(ErrorKind::ParseError, "unbalanced '('");
                if (text_[pos_] == ')') {
                    ++pos_;
                    return {std::move(items)};
                }
                items.push_back(read());
            }
        }
        const std::size_t start = pos_;
        if (text_[pos_] == '|') {
            const auto end = text_.find('|', pos_ + 1);
            if (end == std::string_view::npos) throw Error(ErrorKind::ParseError, "unterminated |symbol|");
            pos_ = end + 1;
            return {std::string(text_.substr(start + 1, end - start - 1))};
        }
        while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
               !std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        return {std::string(text_.substr(start, pos_ - start))};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

double parse_number(std::string atom) {
    if (!atom.empty() && atom.back() == '?') atom.pop_back();  // z3 decimal approximation
    double value = 0.0;
    const auto* first = atom.data();
    const auto* last = atom.data() + atom.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw Error(ErrorKind::ParseError, "unsupported model value '" + atom + "'");
    return value;
}

double evaluate(const SExpr& e) {
    if (e.is_atom()) return parse_number(e.atom());
    const auto& items = e.list();
    if (items.empty() || !items.front().is_atom())
        throw Error(ErrorKind::ParseError, "malformed model term");
    const std::string& op = items.front().atom();
    if (op == "-" && items.size() == 2) return -evaluate(items[1]);
    if (op == "-" && items.size() > 2) {
        double acc = evaluate(items[1]);
        for (std::size_t k = 2; k < items.size(); ++k) acc -= evaluate(items[k]);
        return acc;
    }
    if (op == "+") {
        double acc = 0.0;
        for (std::size_t k = 1; k < items.size(); ++k) acc += evaluate(items[k]);
        return acc;
    }
    if (op == "*") {
        double acc = 1.0;
        for (std::size_t k = 1; k < items.size(); ++k) acc *= evaluate(items[k]);
        return acc;
    }
    if (op == "/" && items.size() == 3) return evaluate(items[1]) / evaluate(items[2]);
    throw Error(ErrorKind::ParseError, "unsupported model term '" + op + "'");
}

void collect_definitions(const SExpr& e, std::map<std::string, double>& values) {
    if (e.is_atom()) return;
    const auto& items = e.list();
    if (items.size() == 5 && items[0].is_atom() && items[0].atom() == "define-fun" &&
        items[1].is_atom()) {
        values[items[1].atom()] = evaluate(items[4]);
        return;
    }
    for (const auto& child : items) collect_definitions(child, values);
}

}  // namespace

Witness parse_smt_model(std::string_view text, const PartialSignMatrix& m, int r) {
    if (r < 1) throw Error(ErrorKind::InvalidParams, "r must be >= 1");
    std::map<std::string, double> values;
    for (const SExpr& e : SExprReader(text).read_all()) collect_definitions(e, values);

    auto lookup = [&](char prefix, std::size_t idx, int k) {
        const std::string name = std::string(1, prefix) + '_' + std::to_string(idx) + '_' + std::to_string(k);
        const auto it = values.find(name);
        if (it == values.end()) throw Error(ErrorKind::ParseError, "model lacks variable " + name);
        return it->second;
    };
    Witness w{Eigen::MatrixXd(m.n_rows(), r), Eigen::MatrixXd(m.n_cols(), r)};
    for (std::size_t i = 0; i < m.n_rows(); ++i)
        for (int k = 0; k < r; ++k) w.C(static_cast<Eigen::Index>(i), k) = lookup('c', i, k);
    for (std::size_t j = 0; j < m.n_cols(); ++j)
        for (int k = 0; k < r; ++k) w.V(static_cast<Eigen::Index>(j), k) = lookup('v', j, k);
    if (const auto bad = count_violations(w, m); bad > 0)
        throw Error(ErrorKind::InvalidModel,
                    std::to_string(bad) + " strict inequalities fail under the model");
    return w;
}

// ---------------------------------------------------------------------------
// Witness search

Witness trivial_witness(const PartialSignMatrix& m, int r) {
    const std::size_t n = m.n_rows();
    const std::size_t p = m.n_cols();
    const std::size_t base = std::min(n, p);
    if (static_cast<std::size_t>(r) < base)
        throw Error(ErrorKind::InvalidParams, "explicit witness needs r >= min(rows, cols)");
    Witness w{Eigen::MatrixXd::Zero(n, r), Eigen::MatrixXd::Zero(p, r)};
    const auto dense = m.to_dense();
    if (n <= p) {
        for (std::size_t i = 0; i < n; ++i) w.C(i, i) = 1.0;
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t i = 0; i < n; ++i) w.V(j, i) = dense[i][j] < 0 ? -1.0 : 1.0;
    } else {
        for (std::size_t j = 0; j < p; ++j) w.V(j, j) = 1.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j) w.C(i, j) = dense[i][j] < 0 ? -1.0 : 1.0;
    }
    return w;
}

namespace {

// Any strict witness rescales to clear a unit margin.
constexpr double kHingeMargin = 1.0;
constexpr int kStepsPerSweep = 10;
constexpr double kLearningRate = 0.05;
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;

struct Adam {
    Eigen::MatrixXd m1, m2;

    explicit Adam(const Eigen::MatrixXd& like)
        : m1(Eigen::MatrixXd::Zero(like.rows(), like.cols())), m2(m1) {}

    void step(Eigen::MatrixXd& x, const Eigen::MatrixXd& grad, int t) {
        m1 = kBeta1 * m1 + (1 - kBeta1) * grad;
        m2 = kBeta2 * m2 + (1 - kBeta2) * grad.cwiseProduct(grad);
        const double c1 = 1 - std::pow(kBeta1, t);
        const double c2 = 1 - std::pow(kBeta2, t);
        x.array() -= kLearningRate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + 1e-8);
    }
};

}  // namespace

std::optional<Witness> search_witness(const PartialSignMatrix& m, int r, const SearchBudget& budget,
                                      std::uint64_t seed) {
    if (r < 1) throw Error(ErrorKind::InvalidParams, "r must be >= 1");
    if (static_cast<std::size_t>(r) >= std::min(m.n_rows(), m.n_cols()))
        return trivial_witness(m, r);

    const auto n = static_cast<Eigen::Index>(m.n_rows());
    const auto p = static_cast<Eigen::Index>(m.n_cols());
    Eigen::MatrixXd gC(n, r);
    Eigen::MatrixXd gV(p, r);
    for (int restart = 0; restart < budget.restarts; ++restart) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
        std::normal_distribution<double> gauss;
        Witness w{Eigen::MatrixXd(n, r), Eigen::MatrixXd(p, r)};
        for (Eigen::Index k = 0; k < w.C.size(); ++k) w.C.data()[k] = gauss(rng);
        for (Eigen::Index k = 0; k < w.V.size(); ++k) w.V.data()[k] = gauss(rng);
        Adam opt_c(w.C);
        Adam opt_v(w.V);

        int t = 0;
        for (int sweep = 0; sweep < budget.sweeps; ++sweep) {
            for (int step = 0; step < kStepsPerSweep; ++step) {
                gC.setZero();
                gV.setZero();
                for (const Entry& e : m.entries()) {
                    const auto i = static_cast<Eigen::Index>(e.row);
                    const auto j = static_cast<Eigen::Index>(e.col);
                    const double s = to_int(e.sign);
                    const double slack = kHingeMargin - s * w.C.row(i).dot(w.V.row(j));
                    if (slack <= 0) continue;
                    gC.row(i) -= 2 * slack * s * w.V.row(j);
                    gV.row(j) -= 2 * slack * s * w.C.row(i);
                }
                ++t;
                opt_c.step(w.C, gC, t);
                opt_v.step(w.V, gV, t);
            }
            if (count_violations(w, m) == 0) return w;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Exact r = 2 by order-type enumeration
//
// Only directions matter, and strict feasibility is an open condition, so the
// enumerated side can be assumed to sit at distinct angles modulo pi with the
// first vector at angle 0. Such a configuration is fixed up to isotopy by the
// circular order of the angles modulo pi plus one half-turn bit per vector.
// Given it, a vector on the other side only sees which arc between the
// perpendicular directions it falls into, so testing arc midpoints is complete.

std::optional<Witness> exact_rank_two(const PartialSignMatrix& m) {
    const bool flip = m.n_rows() < m.n_cols();
    const PartialSignMatrix work = flip ? transpose(m) : m;
    const std::size_t k = work.n_cols();
    if (k > 8) throw Error(ErrorKind::TooLarge, "order-type enumeration limited to 8 vectors");
    if (k == 0) return Witness{Eigen::MatrixXd::Constant(m.n_rows(), 2, 1.0), Eigen::MatrixXd(m.n_cols(), 2)};

    const double pi = std::numbers::pi;
    std::vector<std::size_t> order(k - 1);
    std::iota(order.begin(), order.end(), std::size_t{1});
    std::vector<double> angle(k, 0.0);
    std::vector<double> boundary(2 * k);
    std::vector<double> chosen(work.n_rows(), 0.0);

    do {
        for (std::uint32_t bits = 0; bits < (1u << (k - 1)); ++bits) {
            for (std::size_t t = 0; t + 1 < k; ++t)
                angle[order[t]] = static_cast<double>(t + 1) * pi / static_cast<double>(k) +
                                  (((bits >> t) & 1u) ? pi : 0.0);
            for (std::size_t j = 0; j < k; ++j) {
                boundary[2 * j] = std::fmod(angle[j] + pi / 2, 2 * pi);
                boundary[2 * j + 1] = std::fmod(angle[j] + 3 * pi / 2, 2 * pi);
            }
            std::sort(boundary.begin(), boundary.end());

            bool all_rows = true;
            for (std::size_t i = 0; i < work.n_rows() && all_rows; ++i) {
                bool found = false;
                for (std::size_t b = 0; b < boundary.size() && !found; ++b) {
                    const double next = b + 1 < boundary.size() ? boundary[b + 1] : boundary[0] + 2 * pi;
                    const double theta = 0.5 * (boundary[b] + next);
                    bool ok = true;
                    for (const Entry& e : work.row_entries(i)) {
                        if (to_int(e.sign) * std::cos(theta - angle[e.col]) <= 1e-9) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok) {
                        chosen[i] = theta;
                        found = true;
                    }
                }
                all_rows = found;
            }
            if (!all_rows) continue;

            Eigen::MatrixXd rows(work.n_rows(), 2);
            Eigen::MatrixXd cols(k, 2);
            for (std::size_t i = 0; i < work.n_rows(); ++i)
                rows.row(static_cast<Eigen::Index>(i)) << std::cos(chosen[i]), std::sin(chosen[i]);
            for (std::size_t j = 0; j < k; ++j)
                cols.row(static_cast<Eigen::Index>(j)) << std::cos(angle[j]), std::sin(angle[j]);
            Witness w = flip ? Witness{cols, rows} : Witness{rows, cols};
            if (validates(w, m)) return w;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    return std::nullopt;
}

BruteForceResult brute_force_sign_rank(const PartialSignMatrix& m, int r_max, std::uint64_t seed) {
    if (m.n_rows() + m.n_cols() > 10)
        throw Error(ErrorKind::TooLarge, "brute force oracle needs rows + cols <= 10");
    if (r_max < 1) throw Error(ErrorKind::InvalidParams, "r_max must be >= 1");

    if (auto w1 = is_rank_one(m)) {
        Witness w{Eigen::MatrixXd(m.n_rows(), 1), Eigen::MatrixXd(m.n_cols(), 1)};
        for (std::size_t i = 0; i < m.n_rows(); ++i) w.C(i, 0) = w1->comment_signs[i];
        for (std::size_t j = 0; j < m.n_cols(); ++j) w.V(j, 0) = w1->voter_signs[j];
        return {1, Certainty::Exact, std::move(w)};
    }
    if (auto w2 = exact_rank_two(m)) return {2, Certainty::Exact, std::move(w2)};

    // Lower dimensions are refuted exactly up to 2; above that a search miss is
    // only evidence, so exactness survives only for the first r tried.
    const int ceiling = static_cast<int>(std::min(m.n_rows(), m.n_cols()));
    bool lower_exact = true;
    for (int r = 3; r <= ceiling; ++r) {
        if (r == ceiling) {
            return {r, lower_exact ? Certainty::Exact : Certainty::UpperEvidence, trivial_witness(m, r)};
        }
        if (r <= r_max) {
            if (auto w = search_witness(m, r, SearchBudget{}, derive_seed(seed, static_cast<std::uint64_t>(r))))
                return {r, lower_exact ? Certainty::Exact : Certainty::UpperEvidence, std::move(w)};
        }
        lower_exact = false;
    }
    // min(rows, cols) <= 2 would already have been decided above.
    throw Error(ErrorKind::PrecondViolated, "sign-rank exceeds min(rows, cols)");
}

// ---------------------------------------------------------------------------
// External solver

std::optional<std::string> detect_solver() {
    const char* path_env = std::getenv("PATH");
    if (path_env == nullptr) return std::nullopt;
    const std::array<std::pair<const char*, const char*>, 2> candidates{{
        {"z3", "z3 -smt2"},
        {"cvc5", "cvc5 --produce-models --lang smt2"},
    }};
    for (const auto& [binary, command] : candidates) {
        std::stringstream dirs(path_env);
        std::string dir;
        while (std::getline(dirs, dir, ':')) {
            std::error_code ec;
            if (!dir.empty() && std::filesystem::is_regular_file(std::filesystem::path(dir) / binary, ec))
                return std::string(command);
        }
    }
    return std::nullopt;
}

SolverRun run_external_solver(const std::string& command, const std::string& script) {
    std::string path_template =
        (std::filesystem::temp_directory_path() / "signdim_XXXXXX.smt2").string();
    const int fd = ::mkstemps(path_template.data(), 5);
    if (fd < 0) throw Error(ErrorKind::Io, "cannot create temporary SMT file");
    ::close(fd);
    const std::filesystem::path path(path_template);
    {
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        out << script;
    }
    const std::string full = command + " '" + path.string() + "' 2>&1";
    FILE* pipe = ::popen(full.c_str(), "r");
    if (pipe == nullptr) {
        std::filesystem::remove(path);
        throw Error(ErrorKind::Io, "cannot start solver: " + command);
    }
    SolverRun run;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) run.output.append(buf.data(), got);
    const int rc = ::pclose(pipe);
    std::filesystem::remove(path);

    std::istringstream lines(run.output);
    std::string first;
    while (std::getline(lines, first) && first.find_first_not_of(" \t\r") == std::string::npos) {
    }
    while (!first.empty() && std::isspace(static_cast<unsigned char>(first.back()))) first.pop_back();
    if (first == "sat") {
        run.status = FeasibilityStatus::Feasible;
    } else if (first == "unsat") {
        run.status = FeasibilityStatus::InfeasibleCertified;
    } else if (rc == 127 || (rc != 0 && first != "unknown")) {
        throw Error(ErrorKind::Io, "solver failed (" + command + "): " + run.output.substr(0, 200));
    }
    return run;
}

FeasibilityOutcome check_feasibility(const PartialSignMatrix& m, int r,
                                     const FeasibilityConfig& config) {
    if (r < 1) throw Error(ErrorKind::InvalidParams, "r must be >= 1");
    FeasibilityOutcome out;
    out.r = r;
    if (r == 1) {
        out.method = FeasibilityMethod::RankOne;
        if (auto w1 = is_rank_one(m)) {
            Witness w{Eigen::MatrixXd(m.n_rows(), 1), Eigen::MatrixXd(m.n_cols(), 1)};
            for (std::size_t i = 0; i < m.n_rows(); ++i) w.C(i, 0) = w1->comment_signs[i];
            for (std::size_t j = 0; j < m.n_cols(); ++j) w.V(j, 0) = w1->voter_signs[j];
            out.status = FeasibilityStatus::Feasible;
            out.witness = std::move(w);
        } else {
            out.status = FeasibilityStatus::InfeasibleCertified;
        }
        return out;
    }

    if (config.solver_command) {
        SolverRun run = run_external_solver(*config.solver_command, emit_smt_constraints(m, r));
        out.solver_transcript = run.output;
        out.method = FeasibilityMethod::ExternalSolver;
        if (run.status == FeasibilityStatus::InfeasibleCertified) {
            out.status = FeasibilityStatus::InfeasibleCertified;
            return out;
        }
        if (run.status == FeasibilityStatus::Feasible) {
            try {
                out.witness = parse_smt_model(run.output, m, r);
                out.status = FeasibilityStatus::Feasible;
                return out;
            } catch (const Error&) {
                // Algebraic or non-validating model values; fall back to search.
            }
        }
    }

    out.method = FeasibilityMethod::WitnessSearch;
    if (auto w = search_witness(m, r, config.budget, config.seed)) {
        out.status = FeasibilityStatus::Feasible;
        out.witness = std::move(w);
        return out;
    }
    out.status = FeasibilityStatus::Unknown;
    if (r == 2 && std::min(m.n_rows(), m.n_cols()) <= kPipelineEnumerationLimit) {
        out.method = FeasibilityMethod::BruteForce;
        if (auto w = exact_rank_two(m)) {
            out.status = FeasibilityStatus::Feasible;
            out.witness = std::move(w);
        } else {
            out.status = FeasibilityStatus::InfeasibleCertified;
        }
    }
    return out;
}

}  // namespace signdim
