// Command-line front end: stable-states, solve, sweep, probe, probability.

#include "gltransit/config.hpp"
#include "gltransit/experiments.hpp"
#include "gltransit/io.hpp"
#include "gltransit/solver.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace gltransit;

namespace {

enum Exit : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kConfig = 3,
    kIo = 4,
    kSolver = 5,
};

struct Common {
    std::string config;
    std::string out = "out";
    std::vector<std::string> overrides;
    std::string scheme;
    std::string seed;
};

void add_common(CLI::App* cmd, Common& c, bool with_scheme) {
    cmd->add_option("--config", c.config, "key = value configuration file");
    cmd->add_option("--out", c.out, "output directory")->capture_default_str();
    cmd->add_option("--set", c.overrides, "override a configuration key (key=value, repeatable)");
    if (with_scheme) {
        cmd->add_option("--scheme", c.scheme, "fe or be")->check(CLI::IsMember({"fe", "be", "FE", "BE"}));
        cmd->add_option("--seed", c.seed, "uniform, one_wall or two_wall")
            ->check(CLI::IsMember({"uniform", "one_wall", "two_wall"}));
    }
}

// All overrides are validated here, before any computation.
RunSettings load_settings(const Common& c) {
    Config cfg = c.config.empty() ? Config{} : Config::load(c.config);
    for (const auto& o : c.overrides) cfg.set(o);
    if (!c.scheme.empty()) cfg.set("scheme", c.scheme);
    if (!c.seed.empty()) cfg.set("seed", c.seed);
    return settings_from(cfg);
}

std::string summary(const RunSettings& s, const SolveReport& r) {
    std::string out;
    out += "scheme " + std::string(to_string(s.scheme)) + "\n";
    out += "seed " + std::string(to_string(s.seed)) + "\n";
    out += "grid M=" + std::to_string(s.M) + " N=" + std::to_string(s.N) + "\n";
    out += "delta " + format17(s.params.delta) + "\n";
    out += "K " + format17(s.params.K) + "\n";
    out += "warm_start " + r.warm_start + "\n";
    out += "picard_iters " + std::to_string(r.picard_iters) + "\n";
    out += "descent_iters " + std::to_string(r.descent_iters) + "\n";
    out += "inserted_grids " + std::to_string(r.inserted_grids) + "\n";
    out += "newton_iters_per_stage";
    for (int n : r.newton_iters_per_stage) out += " " + std::to_string(n);
    out += "\n";
    out += "value " + format17(r.value) + "\n";
    out += "residual " + format17(r.residual) + "\n";
    out += "grad_increment " + format17(r.diagnostics.grad_increment) + "\n";
    out += "control_bound " + format17(r.diagnostics.control_bound) + "\n";
    out += "hamiltonian_drift " + format17(r.diagnostics.hamiltonian_drift) + "\n";
    return out;
}

std::string history_csv(const SolveReport& r) {
    std::string out = "iteration,residual,change\n";
    for (std::size_t i = 0; i < r.residual_history.size(); ++i) {
        out += std::to_string(i + 1) + ',' + format17(r.residual_history[i]) + ',' + format17(r.change_history[i]) + '\n';
    }
    return out;
}

int cmd_stable_states(const Common& c) {
    const RunSettings s = load_settings(c);
    const SpaceTimeGrid g = s.grid();
    const StablePair sp = stable_states(s.params, g);
    write_text(fs::path(c.out) / "stable_states.csv", stable_states_csv(sp, g));
    std::cout << "equilibrium residual " << format17(sp.residual) << "\n";
    return kOk;
}

int cmd_solve(const Common& c) {
    const RunSettings s = load_settings(c);
    SolveReport rep;
    const PathPair path = continuation_solve(s.seed, s.scheme, s.solver, &rep);
    const SpaceTimeGrid g = s.grid();
    const fs::path out(c.out);
    write_text(out / "xi.csv", path_csv(path, g, false));
    write_text(out / "eta.csv", path_csv(path, g, true));
    write_text(out / "newton_history.csv", history_csv(rep));
    const std::string text = summary(s, rep);
    write_text(out / "summary.txt", text);
    std::cout << text;
    return kOk;
}

int cmd_sweep(const Common& c) {
    const RunSettings s = load_settings(c);
    if (s.sweep.resolutions.empty()) throw ConfigError("key 'resolutions': required for sweep");
    const SweepResult r = run_sweep(s.sweep);
    emit_report(r, fs::path(c.out) / "sweep");
    std::cout << sweep_csv(r);
    return kOk;
}

int cmd_probe(const Common& c) {
    const RunSettings s = load_settings(c);
    SolveReport rep;
    const PathPair path = continuation_solve(s.seed, s.scheme, s.solver, &rep);
    const Problem base = stage_problem(s.solver.ladder.back(), s.scheme);
    std::vector<Field> dirs;
    for (int k : s.probe_directions) dirs.push_back(sine_direction(k, base.grid));
    const ProbeReport p = semiconcavity_probe(base, path, dirs, s.probe_scales, s.solver);
    emit_report(p, fs::path(c.out) / "probe");
    std::cout << probe_csv(p);
    for (std::size_t i = 0; i < p.skipped.size(); ++i) {
        std::cerr << "direction " << p.skipped[i] << " skipped: " << p.skip_reasons[i] << "\n";
    }
    std::cout << "semiconcavity constant estimate " << format17(p.constant) << "\n";
    return kOk;
}

int cmd_probability(const Common& c, std::optional<double> action, std::optional<double> epsilon) {
    if (action && epsilon && c.config.empty() && c.overrides.empty()) {
        std::cout << format17(transition_probability(*action, *epsilon)) << "\n";
        return kOk;
    }
    const RunSettings s = load_settings(c);
    const auto eps = epsilon ? epsilon : s.params.epsilon;
    if (!eps) throw ConfigError("key 'epsilon': required for probability (or pass --epsilon)");
    if (!action) {
        SolveReport rep;
        continuation_solve(s.seed, s.scheme, s.solver, &rep);
        action = rep.value;
        std::cout << "value " << format17(rep.value) << "\n";
    }
    std::cout << format17(transition_probability(*action, *eps)) << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimally controlled transition paths of the 1-D Ginzburg-Landau equation"};
    app.require_subcommand(1);
    Common c;
    std::optional<double> action;
    std::optional<double> epsilon;

    auto* stable = app.add_subcommand("stable-states", "compute the discrete stable states");
    add_common(stable, c, false);
    auto* solve = app.add_subcommand("solve", "solve one transition problem through the continuation ladder");
    add_common(solve, c, true);
    auto* sweep = app.add_subcommand("sweep", "run a convergence sweep and write CSV and SVG reports");
    add_common(sweep, c, true);
    auto* probe = app.add_subcommand("probe", "probe semiconcavity of the discrete value in the start state");
    add_common(probe, c, true);
    auto* prob = app.add_subcommand("probability", "estimate exp(-action / epsilon)");
    add_common(prob, c, true);
    prob->add_option("--action", action, "action value; solved from the configuration when omitted");
    prob->add_option("--epsilon", epsilon, "noise strength; falls back to the configuration key epsilon");

    if (argc < 2) {
        std::cerr << app.help();
        return kUsage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (stable->parsed()) return cmd_stable_states(c);
        if (solve->parsed()) return cmd_solve(c);
        if (sweep->parsed()) return cmd_sweep(c);
        if (probe->parsed()) return cmd_probe(c);
        if (prob->parsed()) return cmd_probability(c, action, epsilon);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const SweepError& e) {
        std::cerr << "sweep aborted: " << e.what() << "\n";
        return kSolver;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kSolver;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
