#include "gltransit/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace gltransit;

namespace {

Stage stage(int M, int N, double delta, double K) {
    ModelParams p;
    p.delta = delta;
    p.K = K;
    return Stage{SpaceTimeGrid(M, N), p};
}

SolverConfig single(int M, int N, double delta, double K) {
    SolverConfig cfg;
    cfg.ladder = {stage(M, N, delta, K)};
    return cfg;
}

PathPair equilibrium_path(const Problem& pr) {
    PathPair path(pr.grid);
    for (std::size_t n = 0; n < pr.grid.levels(); ++n) path.set_xi(n, pr.start);
    return path;
}

}  // namespace

TEST_CASE("seed and mode names") {
    for (SeedKind k : {SeedKind::Uniform, SeedKind::OneWall, SeedKind::TwoWall}) CHECK(parse_seed(to_string(k)) == k);
    for (WarmStartMode m : {WarmStartMode::Automatic, WarmStartMode::Picard, WarmStartMode::Descent})
        CHECK(parse_warm_start(to_string(m)) == m);
    CHECK_THROWS_AS(parse_seed("three_wall"), std::invalid_argument);
    CHECK_THROWS_AS(parse_warm_start("magic"), std::invalid_argument);
}

TEST_CASE("solver configuration validation") {
    SolverConfig cfg = single(10, 10, 0.06, 1e3);
    CHECK_NOTHROW(cfg.validate());
    cfg.nu = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = single(10, 10, 0.06, 1e3);
    cfg.newton_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = single(10, 10, 0.06, 1e3);
    cfg.ladder.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("seeds pin both ends of the path") {
    const Problem pr = stage_problem(stage(20, 16, 0.06, 1e9), SchemeKind::FE);
    for (SeedKind k : {SeedKind::Uniform, SeedKind::OneWall, SeedKind::TwoWall}) {
        const PathPair s = make_seed(k, pr);
        s.check(pr.grid);
        CHECK(s.xi_field(0) == pr.start);
        CHECK(s.xi_field(16) == pr.target);
    }
    // The two-wall seed is symmetric about x = 1/2 at every level.
    const PathPair two = make_seed(SeedKind::TwoWall, pr);
    for (std::size_t n = 0; n < pr.grid.levels(); ++n)
        for (std::size_t i = 0; i < 19; ++i) CHECK(two.xi(n)[i] == doctest::Approx(two.xi(n)[18 - i]).epsilon(1e-12));
}

TEST_CASE("picard on the equilibrium fixed point") {
    // dt below the explicit bound so the forward sweep reproduces the equilibrium
    Problem pr = stage_problem(stage(20, 100, 0.06, 1e9), SchemeKind::FE);
    pr.target = pr.start;
    const PathPair seed = equilibrium_path(pr);
    SolverConfig cfg = single(20, 100, 0.06, 1e9);
    int iters = -1;
    const PathPair out = picard_warm_start(seed, pr, cfg, &iters);
    CHECK(iters == 1);
    for (std::size_t i = 0; i < out.xi_all().size(); ++i) CHECK(std::abs(out.xi_all()[i] - seed.xi_all()[i]) <= 1e-12);
}

TEST_CASE("picard diverges on the stiff two-wall problem and reports it") {
    const Problem pr = stage_problem(stage(30, 30, 0.06, 1e9), SchemeKind::FE);
    SolverConfig cfg = single(30, 30, 0.06, 1e9);
    CHECK_THROWS_AS(picard_warm_start(make_seed(SeedKind::TwoWall, pr), pr, cfg), WarmStartError);
}

TEST_CASE("newton from an exact solution stops at once") {
    for (SchemeKind kind : {SchemeKind::FE, SchemeKind::BE}) {
        Problem pr = stage_problem(stage(20, 10, 0.06, 1e9), kind);
        pr.target = pr.start;
        SolverConfig cfg = single(20, 10, 0.06, 1e9);
        const PathPair exact = newton_solve(equilibrium_path(pr), pr, cfg);
        NewtonRecord rec;
        const PathPair again = newton_solve(exact, pr, cfg, &rec);
        CHECK(rec.iterations <= 1);
        for (std::size_t i = 0; i < again.xi_all().size(); ++i)
            CHECK(std::abs(again.xi_all()[i] - exact.xi_all()[i]) <= cfg.newton_tol);
    }
}

TEST_CASE("newton reports non-convergence with its history") {
    const Problem pr = stage_problem(stage(30, 30, 0.06, 1e9), SchemeKind::FE);
    SolverConfig cfg = single(30, 30, 0.06, 1e9);
    cfg.newton_max = 2;
    try {
        newton_solve(make_seed(SeedKind::Uniform, pr), pr, cfg);
        FAIL("expected NonConvergenceError");
    } catch (const NonConvergenceError& e) {
        CHECK(e.history().size() == 2);
        CHECK(e.last_residual() == e.history().back());
    }
}

TEST_CASE("continuation solve on a small two-wall problem") {
    for (SchemeKind kind : {SchemeKind::FE, SchemeKind::BE}) {
        SolveReport rep;
        const SolverConfig cfg = single(30, 30, 0.06, 1e9);
        const PathPair path = continuation_solve(SeedKind::TwoWall, kind, cfg, &rep);
        const Problem pr = stage_problem(cfg.ladder.back(), kind);
        CHECK(rep.residual <= cfg.newton_tol);
        CHECK(scaled_residual(path, pr).max_norm() <= cfg.newton_tol);
        CHECK(rep.value == doctest::Approx(discrete_value(path, kind, pr.target.span(), pr.params, pr.grid)));
        CHECK(rep.value > 4.0);
        CHECK(rep.value < 5.5);
        CHECK(!rep.newton_iters_per_stage.empty());
        CHECK(rep.warm_start == "descent");
    }
}

TEST_CASE("K homotopy over a ladder") {
    SolverConfig cfg;
    for (double K : {1e6, 1e7, 1e8, 1e9}) cfg.ladder.push_back(stage(30, 200, 0.03, K));
    SolveReport rep;
    continuation_solve(SeedKind::TwoWall, SchemeKind::FE, cfg, &rep);
    CHECK(rep.newton_iters_per_stage.size() >= 4);
    CHECK(rep.residual <= cfg.newton_tol);
    CHECK(rep.value == doctest::Approx(8.887).epsilon(1e-3));
}

TEST_CASE("continue_from carries a solution to another grid") {
    const SolverConfig coarse = single(30, 30, 0.06, 1e9);
    const PathPair p = continuation_solve(SeedKind::TwoWall, SchemeKind::BE, coarse);
    SolveReport rep;
    const SolverConfig fine = single(30, 60, 0.06, 1e9);
    continue_from(p, coarse.ladder.back().grid, SchemeKind::BE, fine, &rep);
    CHECK(rep.warm_start == "transfer");
    CHECK(rep.residual <= fine.newton_tol);
}

TEST_CASE("fitted order") {
    CHECK(fitted_order({1e-1, 1e-2, 1e-4, 1e-8}, 0.0) == doctest::Approx(2.0));
    CHECK(fitted_order({1e-1, 1e-2, 1e-3}, 0.0) == doctest::Approx(1.0));
    // Entries at the floor are excluded.
    CHECK(fitted_order({1e-1, 1e-2, 1e-4, 1e-8, 1e-16}, 1e-13) == doctest::Approx(2.0));
    CHECK(std::isnan(fitted_order({1e-1, 1e-2}, 0.0)));
}

TEST_CASE("scaled residual divides the terminal rows by 2K") {
    const Problem pr = stage_problem(stage(10, 4, 0.06, 1e6), SchemeKind::FE);
    PathPair path(pr.grid);
    path.set_xi(0, pr.start);
    const ResidualVector raw = assemble_residual(path, pr);
    const ResidualVector s = scaled_residual(path, pr);
    const std::size_t n = pr.grid.interior();
    const std::size_t last = raw.values.size() - n;
    for (std::size_t i = 0; i < last; ++i) CHECK(s.values[i] == raw.values[i]);
    for (std::size_t i = last; i < raw.values.size(); ++i) CHECK(s.values[i] == doctest::Approx(raw.values[i] / 2e6).scale(0));
}
