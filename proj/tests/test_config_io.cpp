#include "gltransit/config.hpp"
#include "gltransit/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gltransit;
namespace fs = std::filesystem;

TEST_CASE("config parsing") {
    const Config c = Config::parse(
        "# comment\n"
        "[problem]\n"
        "scheme = be   # trailing comment\n"
        "[model]\n"
        "delta = 0.06\n"
        "K=1e9\n"
        "M = 40\n"
        "N = 80\n");
    CHECK(c.get("scheme") == "be");
    CHECK(c.get("model.delta") == "0.06");
    CHECK(!c.get("T"));
    const RunSettings s = settings_from(c);
    CHECK(s.scheme == SchemeKind::BE);
    CHECK(s.params.delta == 0.06);
    CHECK(s.params.K == 1e9);
    CHECK(s.grid() == SpaceTimeGrid(40, 80));
    REQUIRE(s.solver.ladder.size() == 1);
    CHECK(s.solver.ladder.back().grid == s.grid());
}

TEST_CASE("config errors name the offending key") {
    CHECK_THROWS_AS(Config::parse("bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[nowhere]\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("delta = 1\ndelta = 2\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("delta\n"), ConfigError);
    CHECK_THROWS_WITH_AS(settings_from(Config::parse("delta = abc\n")), doctest::Contains("delta"), ConfigError);
    CHECK_THROWS_WITH_AS(settings_from(Config::parse("nu = 1\n")), doctest::Contains("solver"), ConfigError);
    CHECK_THROWS_AS(settings_from(Config::parse("M = 1\n")), ConfigError);
    CHECK_THROWS_AS(settings_from(Config::parse("seed = spiral\n")), ConfigError);
    CHECK_THROWS_AS(settings_from(Config::parse("resolutions = 10\n")), ConfigError);
    CHECK_THROWS_AS(Config::load("/nonexistent/file.cfg"), ConfigError);
    Config c;
    CHECK_THROWS_AS(c.set("unknown=3"), ConfigError);
    CHECK_THROWS_AS(c.set("noequals"), ConfigError);
}

TEST_CASE("overrides replace file values") {
    Config c = Config::parse("delta = 0.03\n");
    c.set("model.delta=0.05");
    c.set("scheme", "be");
    CHECK(settings_from(c).params.delta == 0.05);
    CHECK(settings_from(c).scheme == SchemeKind::BE);
}

TEST_CASE("ladder and sweep settings") {
    const Config c = Config::parse(
        "delta = 0.03\nM = 30\nN = 400\n"
        "ladder = 30,200,0.03,1e6; 30,200,0.03,1e9\n"
        "mode = dt\nresolutions = 200, 400, 800\nschemes = fe,be\nfit_points = 2\n"
        "directions = 1,3\nscales = 0.01,0.005\nepsilon = 0.1\n");
    const RunSettings s = settings_from(c);
    REQUIRE(s.solver.ladder.size() == 3);
    CHECK(s.solver.ladder[0].params.K == 1e6);
    CHECK(s.solver.ladder[2].grid == SpaceTimeGrid(30, 400));
    CHECK(s.sweep.mode == SweepMode::Dt);
    CHECK(s.sweep.fixed == 30);
    CHECK(s.sweep.resolutions == std::vector<int>{200, 400, 800});
    CHECK(s.sweep.schemes.size() == 2);
    CHECK(s.sweep.fit_points == 2);
    CHECK(s.probe_directions == std::vector<int>{1, 3});
    CHECK(s.params.epsilon == 0.1);
}

TEST_CASE("csv output") {
    CHECK(format17(0.1) == "0.10000000000000001");
    const SpaceTimeGrid g(3, 2);
    PathPair p(g);
    p.set_xi(1, Field{0.5, -0.25});
    const std::string csv = path_csv(p, g);
    CHECK(csv.starts_with("t,x1,x2\n0,0,0\n0.5,0.5,-0.25\n"));

    ModelParams params;
    params.delta = 0.06;
    const SpaceTimeGrid g20(20, 1);
    const std::string ss = stable_states_csv(stable_states(params, g20), g20);
    CHECK(ss.starts_with("x,phi_plus,phi_minus\n"));

    const fs::path dir = fs::temp_directory_path() / "gltransit_tests" / "io" / "nested";
    fs::remove_all(dir.parent_path());
    write_text(dir / "a.txt", "hello\n");
    std::ifstream in(dir / "a.txt");
    std::string line;
    std::getline(in, line);
    CHECK(line == "hello");
    CHECK_THROWS_AS(write_text("/proc/forbidden/a.txt", "x"), IoError);
}
