#pragma once

#include "gltransit/grid.hpp"
#include "gltransit/model.hpp"
#include "gltransit/schemes.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace gltransit {

/// The damped fixed-point warm start blew up; a coarser grid or a larger nu may help.
class WarmStartError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Newton did not meet its tolerance within the iteration budget.
class NonConvergenceError : public SolverError {
public:
    NonConvergenceError(const std::string& what, std::vector<double> history)
        : SolverError(what, history.empty() ? 0.0 : history.back()), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

enum class SeedKind { Uniform, OneWall, TwoWall };

std::string_view to_string(SeedKind k) noexcept;
SeedKind parse_seed(std::string_view s);

/// How the first ladder stage is brought into a basin before Newton.
///   picard  - damped fixed-point sweeps only
///   descent - limited-memory secant descent on the reduced FE objective only
///   automatic - picard, falling back to descent when picard diverges or Newton fails from it
enum class WarmStartMode { Automatic, Picard, Descent };

std::string_view to_string(WarmStartMode m) noexcept;
WarmStartMode parse_warm_start(std::string_view s);

struct Stage {
    SpaceTimeGrid grid;
    ModelParams params;
};

struct SolverConfig {
    double nu = 0.9;
    double picard_tol = 1e-3;
    int picard_max = 200;
    double newton_tol = 1e-13;
    int newton_max = 30;
    WarmStartMode warm_start = WarmStartMode::Automatic;
    double descent_tol = 1e-2;     ///< max |alpha^n + eta^{n+1}| at which descent hands over to Newton
    int descent_max = 20000;
    double descent_K = 1e4;        ///< terminal weight used during descent (capped by the stage K)
    double K_step = 100.0;         ///< factor between automatic K stages after the warm start
    std::vector<Stage> ladder;

    /// Throws std::invalid_argument on out-of-range settings.
    void validate() const;
};

struct NewtonRecord {
    int iterations = 0;
    std::vector<double> residuals;  ///< scaled residual max-norm after each iteration
    std::vector<double> changes;    ///< max-norm of each Newton update
};

struct SolveReport {
    int picard_iters = 0;
    int descent_iters = 0;
    std::string warm_start;                 ///< which warm start produced the first Newton guess
    std::vector<int> newton_iters_per_stage;
    int inserted_grids = 0;                 ///< intermediate grids added after failed transfers
    std::vector<double> residual_history;   ///< final stage only
    std::vector<double> change_history;     ///< final stage only
    double value = 0.0;
    double residual = 0.0;                  ///< independently re-evaluated scaled residual
    Diagnostics diagnostics;
};

/// Residual with the rows that carry the 2K terminal factor divided by max(1, 2K).
///
/// At large K the raw terminal rows cannot drop below 2K times the rounding of xi^N; the
/// scaled rows measure the same equations in state units.
ResidualVector scaled_residual(const PathPair& path, const Problem& pr);

/// Time-indexed initial guess from the chosen family, with xi^0 = start and xi^N = target.
PathPair make_seed(SeedKind kind, const Problem& pr);

/// Damped fixed-point iteration: dual sweep back from the terminal condition, state sweep
/// forward under control -eta, blend xi <- nu xi + (1 - nu) xi_upd. Uses the sweeps of pr.kind.
/// `iterations`, when given, receives the number of sweeps performed.
PathPair picard_warm_start(const PathPair& seed, const Problem& pr, const SolverConfig& cfg,
                           int* iterations = nullptr);

/// Limited-memory secant descent on the reduced FE objective, started from the controls that
/// reproduce `seed`. Runs on `pr.grid`, which must satisfy the explicit stability bound.
PathPair descent_warm_start(const PathPair& seed, const Problem& pr, const SolverConfig& cfg,
                            int* iterations = nullptr);

/// Full-step Newton with a freshly factored banded LU each iteration. Stops when every
/// component of the update and of the scaled residual is <= newton_tol.
PathPair newton_solve(const PathPair& guess, const Problem& pr, const SolverConfig& cfg, NewtonRecord* record = nullptr);

/// Problem for one ladder stage: stable states of that stage as start and target.
Problem stage_problem(const Stage& s, SchemeKind kind);

/// Warm start on the first stage, Newton on every stage, paths carried across by transfer_path.
PathPair continuation_solve(SeedKind seed, SchemeKind kind, const SolverConfig& cfg, SolveReport* report = nullptr);

/// Continues an existing solution through the ladder (no warm start).
PathPair continue_from(const PathPair& path, const SpaceTimeGrid& from, SchemeKind kind, const SolverConfig& cfg,
                       SolveReport* report = nullptr);

/// Convergence order log(r3/r2)/log(r2/r1) of the last three entries of `history` above `floor`.
/// Returns NaN when fewer than three such entries exist.
double fitted_order(const std::vector<double>& history, double floor);

}  // namespace gltransit
