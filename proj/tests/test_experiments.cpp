#include "gltransit/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gltransit;
namespace fs = std::filesystem;

namespace {

SolverConfig base_config(int M, int N, double delta, double K) {
    ModelParams p;
    p.delta = delta;
    p.K = K;
    SolverConfig cfg;
    cfg.ladder = {Stage{SpaceTimeGrid(M, N), p}};
    return cfg;
}

std::string slurp(const fs::path& f) {
    std::ifstream in(f);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& s, std::string_view prefix = {}) {
    int n = 0;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);)
        if (line.starts_with(prefix)) ++n;
    return n;
}

fs::path scratch(const char* name) {
    const fs::path d = fs::temp_directory_path() / "gltransit_tests" / name;
    fs::remove_all(d);
    return d;
}

}  // namespace

TEST_CASE("sweep mode names") {
    for (SweepMode m : {SweepMode::DxDt, SweepMode::Dx, SweepMode::Dt}) CHECK(parse_sweep_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_sweep_mode("dz"), std::invalid_argument);
}

TEST_CASE("richardson extrapolation") {
    const std::vector<StepValue> line{{0.1, 1.1}, {0.05, 1.05}};
    CHECK(richardson_extrapolate(line) == doctest::Approx(1.0));
    const std::vector<StepValue> flat{{0.1, 3.0}, {0.05, 3.0}, {0.025, 3.0}};
    CHECK(richardson_extrapolate(flat) == doctest::Approx(3.0));
    // Only the finest two points are used when asked.
    const std::vector<StepValue> bent{{0.4, 9.0}, {0.1, 1.1}, {0.05, 1.05}};
    CHECK(richardson_extrapolate(bent, 2) == doctest::Approx(1.0));
    CHECK_THROWS_AS(affine_fit(std::vector<StepValue>{{0.1, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(affine_fit(std::vector<StepValue>{{0.1, 1.0}, {0.1, 2.0}}), std::invalid_argument);
}

TEST_CASE("log-log slope and power fit") {
    std::vector<StepValue> pts;
    for (double h : {0.1, 0.05, 0.025, 0.0125}) pts.emplace_back(h, 3.0 * h * h);
    CHECK(loglog_slope(pts) == doctest::Approx(2.0));
    std::vector<StepValue> shifted;
    for (double h : {1.0 / 30, 1.0 / 40, 1.0 / 50, 1.0 / 60, 1.0 / 80}) shifted.emplace_back(h, 8.5 + 900.0 * std::pow(h, 2.37));
    const PowerFit f = power_fit(shifted);
    CHECK(f.order == doctest::Approx(2.37).epsilon(1e-6));
    CHECK(f.limit == doctest::Approx(8.5).epsilon(1e-9));
    CHECK(f.coefficient == doctest::Approx(900.0).epsilon(1e-5));
    CHECK_THROWS_AS(power_fit(std::vector<StepValue>{{0.1, 1.0}, {0.2, 2.0}}), std::invalid_argument);
}

TEST_CASE("sweep validation") {
    SweepSpec spec;
    spec.base = base_config(16, 32, 0.06, 1e9);
    spec.mode = SweepMode::Dt;
    spec.fixed = 16;
    spec.resolutions = {32};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.resolutions = {32, 64, 48};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.resolutions = {32, 48, 64};
    CHECK_NOTHROW(spec.validate());
    CHECK(spec.grid(1) == SpaceTimeGrid(16, 48));
    CHECK_THROWS_AS(run_sweep(SweepSpec{}), std::invalid_argument);
}

TEST_CASE("a small dt sweep and its report") {
    SweepSpec spec;
    spec.base = base_config(20, 40, 0.06, 1e9);
    spec.mode = SweepMode::Dt;
    spec.fixed = 20;
    spec.resolutions = {40, 60, 80};
    const SweepResult r = run_sweep(spec);
    REQUIRE(r.rows.size() == 6);
    for (SchemeKind k : {SchemeKind::FE, SchemeKind::BE}) {
        const SchemeFit* f = r.fit(k);
        REQUIRE(f != nullptr);
        REQUIRE(f->extrapolated.has_value());
        CHECK(std::isfinite(f->fitted_order));
    }
    // Both schemes extrapolate to nearly the same limit.
    CHECK(std::abs(*r.fit(SchemeKind::FE)->extrapolated - *r.fit(SchemeKind::BE)->extrapolated) < 0.05);

    const fs::path dir = scratch("sweep");
    emit_report(r, dir / "sweep");
    const std::string csv = slurp(dir / "sweep.csv");
    CHECK(csv == sweep_csv(r));
    CHECK(count_lines(csv, "dt,") == 6);
    CHECK(count_lines(csv, "fitted_order,") == 2);
    CHECK(slurp(dir / "sweep.svg").starts_with("<svg"));

    // Identical inputs give byte-identical reports.
    CHECK(sweep_csv(run_sweep(spec)) == csv);
}

TEST_CASE("a three-point single-scheme sweep has three data rows and an order row") {
    SweepSpec spec;
    spec.base = base_config(20, 40, 0.06, 1e9);
    spec.mode = SweepMode::Dx;
    spec.fixed = 40;
    spec.schemes = {SchemeKind::FE};
    spec.resolutions = {20, 24, 30};
    const std::string csv = sweep_csv(run_sweep(spec));
    CHECK(count_lines(csv) == 1 + 3 + 3);
    CHECK(count_lines(csv, "dx,FE,") == 3);
    CHECK(count_lines(csv, "fitted_order,FE,") == 1);
}

TEST_CASE("empty results give header-only files") {
    const fs::path dir = scratch("empty");
    emit_report(SweepResult{}, dir / "sweep");
    CHECK(count_lines(slurp(dir / "sweep.csv")) == 1);
    emit_report(ProbeReport{}, dir / "probe");
    CHECK(slurp(dir / "probe.csv") == "direction_id,h,q,ratio,flagged\n");
}

TEST_CASE("sine directions") {
    const SpaceTimeGrid g(8, 1);
    const Field d = sine_direction(2, g);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == doctest::Approx(-d[d.size() - 1 - i]));
    CHECK(d[1] == doctest::Approx(1.0));
}

TEST_CASE("semiconcavity probe") {
    const SolverConfig cfg = base_config(20, 40, 0.06, 1e9);
    const PathPair sol = continuation_solve(SeedKind::TwoWall, SchemeKind::FE, cfg);
    const Problem base = stage_problem(cfg.ladder.back(), SchemeKind::FE);
    const std::vector<Field> dirs{sine_direction(1, base.grid), sine_direction(2, base.grid)};
    const std::vector<double> scales{1e-2, 5e-3, 2.5e-3};
    const ProbeReport rep = semiconcavity_probe(base, sol, dirs, scales, cfg);
    CHECK(rep.rows.size() == 6);
    CHECK(rep.skipped.empty());
    CHECK(std::isfinite(rep.constant));
    // q / h^2 settles to a finite limit along each direction.
    for (int d = 0; d < 2; ++d) {
        const double r1 = rep.rows[3 * d + 1].ratio;
        const double r2 = rep.rows[3 * d + 2].ratio;
        CHECK(std::abs(r1 - r2) <= 0.05 * std::abs(r2) + 1e-6);
    }
    const std::string csv = probe_csv(rep);
    CHECK(count_lines(csv) == 7);
}

TEST_CASE("value is even under a reflection-odd start perturbation") {
    // x -> 1 - x fixes the stable states and the two-wall path but maps sin(2 pi x) to its negative.
    const SolverConfig cfg = base_config(20, 40, 0.06, 1e9);
    const Problem pr = stage_problem(cfg.ladder.back(), SchemeKind::FE);
    const PathPair centre = continuation_solve(SeedKind::TwoWall, SchemeKind::FE, cfg);
    const Field d = sine_direction(2, pr.grid);
    double u[2];
    for (int s = 0; s < 2; ++s) {
        Problem q = pr;
        q.start = pr.start + (s == 0 ? 0.01 : -0.01) * d;
        PathPair guess = centre;
        guess.set_xi(0, q.start);
        const PathPair sol = newton_solve(guess, q, cfg);
        u[s] = discrete_value(sol, SchemeKind::FE, q.target.span(), q.params, q.grid);
    }
    CHECK(u[0] == doctest::Approx(u[1]).epsilon(1e-10));
}
