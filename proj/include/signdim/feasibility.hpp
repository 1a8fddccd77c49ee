#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "signdim/sign_matrix.hpp"

namespace signdim {

/// Comment opinions C (rows x r) and voter opinions V (cols x r) with
/// s_ij * <c_i, v_j> > 0 on every observed entry.
struct Witness {
    Eigen::MatrixXd C;
    Eigen::MatrixXd V;

    int dimension() const { return static_cast<int>(C.cols()); }
};

enum class FeasibilityStatus : std::uint8_t { Feasible, InfeasibleCertified, Unknown };
enum class FeasibilityMethod : std::uint8_t { RankOne, WitnessSearch, ExternalSolver, BruteForce };

struct FeasibilityOutcome {
    FeasibilityStatus status = FeasibilityStatus::Unknown;
    FeasibilityMethod method = FeasibilityMethod::WitnessSearch;
    int r = 0;
    std::optional<Witness> witness;
    /// Raw solver output when an external solver was consulted.
    std::string solver_transcript;
};

std::string_view to_string(FeasibilityStatus s);
std::string_view to_string(FeasibilityMethod m);

/// Deterministic vote rule: Up iff <c, v> >= 0. Throws DimensionMismatch.
Direction predict_deterministic(const Eigen::Ref<const Eigen::VectorXd>& c,
                                const Eigen::Ref<const Eigen::VectorXd>& v);

/// Number of observed entries where s_ij * <c_i, v_j> <= 0.
std::size_t count_violations(const Witness& w, const PartialSignMatrix& m);
bool validates(const Witness& w, const PartialSignMatrix& m);

/// SMT-LIB 2 script over QF_NRA: variables c_<i>_<k>, v_<j>_<k>, one strict
/// inequality per observed entry in (i, j) order, then (check-sat) (get-model).
std::string emit_smt_constraints(const PartialSignMatrix& m, int r);

/// Reads define-fun values for every declared variable from a solver model
/// (a leading sat line is tolerated). Accepts decimals, (- x), (/ a b), (+ ..)
/// and (* ..). Throws ParseError on missing variables or unsupported terms and
/// InvalidModel if a strict inequality fails.
Witness parse_smt_model(std::string_view text, const PartialSignMatrix& m, int r);

struct SearchBudget {
    int restarts = 20;
    int sweeps = 300;
};

/// Randomized sat-finder: Adam on the squared hinge loss
/// sum max(0, 1 - s_ij <c_i, v_j>)^2 from Gaussian starts, with random
/// restarts. Each sweep is ten full-gradient steps followed by a strict sign
/// check. A miss is not an infeasibility certificate.
std::optional<Witness> search_witness(const PartialSignMatrix& m, int r, const SearchBudget& budget,
                                      std::uint64_t seed);

/// Explicit witness at r = min(rows, cols): identity on the smaller side, the
/// (arbitrarily completed) sign rows on the other. Zero-padded up to r.
Witness trivial_witness(const PartialSignMatrix& m, int r);

/// Exact r = 2 decision for small matrices by enumerating the circular order
/// types of the smaller side's directions. Throws TooLarge above 8 vectors on
/// the smaller side.
std::optional<Witness> exact_rank_two(const PartialSignMatrix& m);

enum class Certainty : std::uint8_t { Exact, UpperEvidence };

struct BruteForceResult {
    int r = 0;
    Certainty certainty = Certainty::UpperEvidence;
    std::optional<Witness> witness;
};

/// Desk-scale oracle for the sign-rank of a partial matrix (rows + cols <= 10).
/// r = 1 by the rank-one test, r = 2 by exact order-type enumeration, r >= 3 by
/// witness search up to r_max and the explicit witness at min(rows, cols).
BruteForceResult brute_force_sign_rank(const PartialSignMatrix& m, int r_max,
                                       std::uint64_t seed = 0);

struct SolverRun {
    FeasibilityStatus status = FeasibilityStatus::Unknown;  // Feasible means sat
    std::string output;
};

/// Writes the script to a temporary file and runs `command <file>`.
/// Throws Io if the process cannot be started.
SolverRun run_external_solver(const std::string& command, const std::string& script);

/// First solver found on PATH ("z3 -smt2" or "cvc5 --produce-models"), if any.
std::optional<std::string> detect_solver();

struct FeasibilityConfig {
    std::optional<std::string> solver_command;
    SearchBudget budget;
    std::uint64_t seed = 0;
};

/// Largest smaller side for which check_feasibility falls back to exact_rank_two.
inline constexpr std::size_t kPipelineEnumerationLimit = 6;

/// r = 1 is decided by the rank-one test. For r >= 2 the external solver is
/// consulted when configured (sat must come with a model that validates; unsat
/// is a certificate), falling back to witness search. A search miss at r = 2
/// on a matrix within kPipelineEnumerationLimit is settled by exact_rank_two.
FeasibilityOutcome check_feasibility(const PartialSignMatrix& m, int r,
                                     const FeasibilityConfig& config);

}  // namespace signdim
