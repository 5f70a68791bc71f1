#include "gltransit/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

namespace gltransit {

std::string_view to_string(SeedKind k) noexcept {
    switch (k) {
        case SeedKind::Uniform: return "uniform";
        case SeedKind::OneWall: return "one_wall";
        default: return "two_wall";
    }
}

SeedKind parse_seed(std::string_view s) {
    if (s == "uniform") return SeedKind::Uniform;
    if (s == "one_wall") return SeedKind::OneWall;
    if (s == "two_wall") return SeedKind::TwoWall;
    throw std::invalid_argument("unknown seed '" + std::string(s) + "' (expected uniform, one_wall or two_wall)");
}

std::string_view to_string(WarmStartMode m) noexcept {
    switch (m) {
        case WarmStartMode::Picard: return "picard";
        case WarmStartMode::Descent: return "descent";
        default: return "automatic";
    }
}

WarmStartMode parse_warm_start(std::string_view s) {
    if (s == "automatic") return WarmStartMode::Automatic;
    if (s == "picard") return WarmStartMode::Picard;
    if (s == "descent") return WarmStartMode::Descent;
    throw std::invalid_argument("unknown warm start '" + std::string(s) + "' (expected automatic, picard or descent)");
}

void SolverConfig::validate() const {
    if (!(nu >= 0.0 && nu < 1.0)) throw std::invalid_argument("nu must lie in [0, 1)");
    if (!(picard_tol > 0.0)) throw std::invalid_argument("picard_tol must be positive");
    if (picard_max < 1) throw std::invalid_argument("picard_max must be positive");
    if (!(newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be positive");
    if (newton_max < 1) throw std::invalid_argument("newton_max must be positive");
    if (!(descent_tol > 0.0)) throw std::invalid_argument("descent_tol must be positive");
    if (descent_max < 1) throw std::invalid_argument("descent_max must be positive");
    if (!(descent_K > 0.0)) throw std::invalid_argument("descent_K must be positive");
    if (!(K_step > 1.0)) throw std::invalid_argument("K_step must exceed 1");
    if (ladder.empty()) throw std::invalid_argument("ladder must contain at least one stage");
    for (const auto& s : ladder) {
        s.params.validate();
        if (std::abs(s.params.T - s.grid.T()) > 1e-14 * s.params.T) {
            throw std::invalid_argument("ladder stage horizon does not match its grid");
        }
    }
}

namespace {

double terminal_scale(const Problem& pr) { return 1.0 / std::max(1.0, 2.0 * pr.params.K); }

// Offset of the dual block that carries the 2K terminal factor.
std::size_t terminal_rows(const Problem& pr) {
    const std::size_t n = pr.grid.interior();
    return (2 * static_cast<std::size_t>(pr.grid.N()) - 1) * n;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Dual sweep of the scheme backward from eta^N = 2K (xi^N - target).
void dual_sweep(PathPair& path, const Problem& pr) {
    const auto& g = pr.grid;
    const std::size_t N = static_cast<std::size_t>(g.N());
    auto xiN = path.xi(N);
    auto etaN = path.eta(N);
    for (std::size_t i = 0; i < xiN.size(); ++i) etaN[i] = 2.0 * pr.params.K * (xiN[i] - pr.target[i]);
    for (std::size_t n = N; n-- > 0;) {
        const Field e = pr.kind == SchemeKind::FE ? fe_dual_step_back(path.eta(n + 1), path.xi(n), pr.params, g)
                                                  : be_dual_step_back(path.eta(n + 1), path.xi(n + 1), pr.params, g);
        path.set_eta(n, e);
    }
}

}  // namespace

ResidualVector scaled_residual(const PathPair& path, const Problem& pr) {
    ResidualVector r = assemble_residual(path, pr);
    const double s = terminal_scale(pr);
    for (std::size_t i = terminal_rows(pr); i < r.values.size(); ++i) r.values[i] *= s;
    return r;
}

PathPair make_seed(SeedKind kind, const Problem& pr) {
    pr.validate();
    const auto& g = pr.grid;
    const double w = 2.0 * pr.params.delta;
    const std::size_t N = static_cast<std::size_t>(g.N());
    PathPair path(g);
    for (std::size_t n = 0; n <= N; ++n) {
        const double t = static_cast<double>(n) / static_cast<double>(N);
        auto xi = path.xi(n);
        for (std::size_t i = 0; i < xi.size(); ++i) {
            const double x = g.x(i);
            const double a = pr.start[i];
            const double b = pr.target[i];
            switch (kind) {
                case SeedKind::Uniform: xi[i] = (1.0 - t) * a + t * b; break;
                case SeedKind::OneWall: {
                    // wall enters at x=0 and leaves at x=1; the left side has already flipped
                    const double s = 0.5 * (1.0 + std::tanh((x - t) / w));
                    xi[i] = s * a + (1.0 - s) * b;
                    break;
                }
                case SeedKind::TwoWall: {
                    // smooth nucleation at x=1/2 over the first tenth of the horizon, then walls move out
                    constexpr double tn = 0.1;
                    double r = std::min(1.0, t / tn);
                    r = r * r * (3.0 - 2.0 * r);
                    const double c = std::max(0.0, (t - tn) / (1.0 - tn)) * (0.5 + 3.0 * w);
                    const double s = r * 0.5 * (1.0 - std::tanh((std::abs(x - 0.5) - c) / w));
                    xi[i] = (1.0 - s) * a + s * b;
                    break;
                }
            }
        }
    }
    path.set_xi(0, pr.start);
    path.set_xi(N, pr.target);
    // controls that reproduce the seed under the FE state step
    const Field zero = Field::zeros(g);
    for (std::size_t n = 0; n < N; ++n) {
        const Field free = fe_state_step(path.xi(n), zero.span(), pr.params, g);
        auto eta = path.eta(n + 1);
        for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = -(path.xi(n + 1)[i] - free[i]) / g.dt();
    }
    const Field e0 = fe_dual_step_back(path.eta(1), path.xi(0), pr.params, g);
    path.set_eta(0, e0);
    return path;
}

PathPair picard_warm_start(const PathPair& seed, const Problem& pr, const SolverConfig& cfg, int* iterations) {
    pr.validate();
    seed.check(pr.grid);
    if (!(cfg.nu >= 0.0 && cfg.nu < 1.0)) throw std::invalid_argument("nu must lie in [0, 1)");
    const auto& g = pr.grid;
    const std::size_t N = static_cast<std::size_t>(g.N());
    PathPair path = seed;
    path.set_xi(0, pr.start);
    PathPair upd(g);
    std::vector<double> history;
    int it = 0;
    try {
        while (it < cfg.picard_max) {
            ++it;
            dual_sweep(path, pr);
            upd.set_xi(0, pr.start);
            for (std::size_t n = 0; n < N; ++n) {
                const Field control = -1.0 * (pr.kind == SchemeKind::FE ? path.eta_field(n + 1) : path.eta_field(n));
                const Field next = pr.kind == SchemeKind::FE ? fe_state_step(upd.xi(n), control.span(), pr.params, g)
                                                             : be_state_step(upd.xi(n), control.span(), pr.params, g);
                upd.set_xi(n + 1, next);
            }
            auto xi = path.xi_all();
            auto xu = upd.xi_all();
            double change = 0.0;
            for (std::size_t i = 0; i < xi.size(); ++i) {
                const double step = (1.0 - cfg.nu) * (xu[i] - xi[i]);
                xi[i] += step;
                change = std::max(change, std::abs(step));
            }
            if (!std::isfinite(change) || !all_finite(xi))
                throw WarmStartError("warm start produced non-finite values", change);
            history.push_back(change);
            if (history.size() > 5 && change > 10.0 * history[history.size() - 6]) {
                throw WarmStartError("warm start diverges (change grew tenfold over 5 sweeps); "
                                     "use a coarser grid or a larger nu",
                                     change);
            }
            if (change <= cfg.picard_tol) break;
        }
        dual_sweep(path, pr);
    } catch (const WarmStartError&) {
        throw;
    } catch (const SolverError& e) {
        throw WarmStartError(std::string("warm start failed: ") + e.what() + "; use a coarser grid or a larger nu",
                             e.last_residual());
    }
    if (!all_finite(path.eta_all())) throw WarmStartError("warm start produced non-finite duals", 0.0);
    if (iterations) *iterations = it;
    return path;
}

namespace {

using Vec = std::vector<double>;

double vdot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct ReducedObjective {
    const Problem& pr;
    std::size_t n;
    std::size_t N;

    std::vector<Field> split(const Vec& x) const {
        std::vector<Field> a(N);
        for (std::size_t k = 0; k < N; ++k) {
            a[k] = Field(Vec(x.begin() + static_cast<std::ptrdiff_t>(k * n),
                             x.begin() + static_cast<std::ptrdiff_t>((k + 1) * n)));
        }
        return a;
    }

    double operator()(const Vec& x, Vec& grad) const {
        const auto a = split(x);
        const auto G = adjoint_gradient(a, pr.start.span(), pr.target.span(), pr.params, pr.grid);
        grad.resize(x.size());
        for (std::size_t k = 0; k < N; ++k) std::copy(G[k].begin(), G[k].end(), grad.begin() + static_cast<std::ptrdiff_t>(k * n));
        return reduced_value(a, pr.start.span(), pr.target.span(), pr.params, pr.grid);
    }
};

}  // namespace

PathPair descent_warm_start(const PathPair& seed, const Problem& pr, const SolverConfig& cfg, int* iterations) {
    pr.validate();
    seed.check(pr.grid);
    const auto& g = pr.grid;
    if (!(g.dt() <= g.dx() * g.dx() / (2.0 * pr.params.delta) && g.dt() < pr.params.delta)) {
        throw std::invalid_argument("descent warm start needs dt <= dx^2 / (2 delta) and dt < delta");
    }
    const std::size_t n = g.interior();
    const std::size_t N = static_cast<std::size_t>(g.N());
    const ReducedObjective f{pr, n, N};
    const double w = g.dt() * g.dx();
    constexpr std::size_t memory = 10;

    Vec x(N * n);
    for (std::size_t k = 0; k < N; ++k) {
        auto e = seed.eta(k + 1);
        for (std::size_t i = 0; i < n; ++i) x[k * n + i] = -e[i];
    }
    Vec grad;
    double fx = f(x, grad);
    if (!std::isfinite(fx)) throw WarmStartError("descent warm start: seed has a non-finite value", fx);

    std::deque<Vec> S;
    std::deque<Vec> Y;
    Vec q, xn, gn;
    int it = 0;
    for (; it < cfg.descent_max; ++it) {
        if (max_abs(grad) / w <= cfg.descent_tol) break;
        // two-loop recursion for the search direction
        q = grad;
        std::vector<double> alpha(S.size());
        for (std::size_t j = S.size(); j-- > 0;) {
            alpha[j] = vdot(S[j], q) / vdot(Y[j], S[j]);
            for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[j] * Y[j][i];
        }
        const double gamma = S.empty() ? 1.0 / (w * (1.0 + 2.0 * pr.params.K))
                                       : vdot(S.back(), Y.back()) / vdot(Y.back(), Y.back());
        for (auto& v : q) v *= gamma;
        for (std::size_t j = 0; j < S.size(); ++j) {
            const double beta = vdot(Y[j], q) / vdot(Y[j], S[j]);
            for (std::size_t i = 0; i < q.size(); ++i) q[i] += S[j][i] * (alpha[j] - beta);
        }
        for (auto& v : q) v = -v;
        double slope = vdot(q, grad);
        if (!(slope < 0.0)) {
            S.clear();
            Y.clear();
            q = grad;
            for (auto& v : q) v *= -gamma;
            slope = vdot(q, grad);
        }
        // Armijo backtracking
        double step = 1.0;
        double fn = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
            xn = x;
            for (std::size_t i = 0; i < x.size(); ++i) xn[i] += step * q[i];
            fn = f(xn, gn);
            if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        Vec s(x.size());
        Vec y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            s[i] = xn[i] - x[i];
            y[i] = gn[i] - grad[i];
        }
        if (vdot(s, y) > 0.0) {
            S.push_back(std::move(s));
            Y.push_back(std::move(y));
            if (S.size() > memory) {
                S.pop_front();
                Y.pop_front();
            }
        }
        x.swap(xn);
        grad.swap(gn);
        fx = fn;
    }
    const auto controls = f.split(x);
    const auto xi = simulate_controls(controls, pr.start.span(), pr.params, g);
    PathPair path(g);
    for (std::size_t k = 0; k <= N; ++k) path.set_xi(k, xi[k]);
    for (std::size_t k = 0; k < N; ++k) path.set_eta(k + 1, -1.0 * controls[k]);
    path.set_eta(0, fe_dual_step_back(path.eta(1), path.xi(0), pr.params, g));
    if (iterations) *iterations = it;
    return path;
}

PathPair newton_solve(const PathPair& guess, const Problem& pr, const SolverConfig& cfg, NewtonRecord* record) {
    pr.validate();
    guess.check(pr.grid);
    auto z = pack_unknowns(guess, pr.kind);
    PathPair path = unpack_unknowns(z, pr);
    const double s = terminal_scale(pr);
    const std::size_t first = terminal_rows(pr);
    NewtonRecord rec;
    for (int it = 0; it < cfg.newton_max; ++it) {
        ResidualVector r = scaled_residual(path, pr);
        BandedJacobian J = assemble_jacobian(path, pr);
        auto& A = J.matrix;
        for (std::size_t i = first; i < A.rows(); ++i) {
            const std::size_t lo = i > A.lower() ? i - A.lower() : 0;
            const std::size_t hi = std::min(A.rows() - 1, i + A.upper());
            for (std::size_t j = lo; j <= hi; ++j) A.at(i, j) *= s;
        }
        std::vector<double> d(r.values.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = -r.values[i];
        BandedLU(std::move(A)).solve(d);
        const double change = max_abs(d);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += d[i];
        path = unpack_unknowns(z, pr);
        const double res = scaled_residual(path, pr).max_norm();
        rec.iterations = it + 1;
        rec.changes.push_back(change);
        rec.residuals.push_back(res);
        if (!std::isfinite(res) || !std::isfinite(change)) {
            if (record) *record = rec;
            throw NonConvergenceError("Newton iterates became non-finite", rec.residuals);
        }
        if (change <= cfg.newton_tol && res <= cfg.newton_tol) {
            if (record) *record = std::move(rec);
            return path;
        }
    }
    if (record) *record = rec;
    throw NonConvergenceError("Newton did not converge in " + std::to_string(cfg.newton_max) + " iterations",
                              rec.residuals);
}

Problem stage_problem(const Stage& s, SchemeKind kind) {
    const StablePair sp = stable_states(s.params, s.grid);
    Problem pr{s.params, s.grid, sp.phi_plus, sp.phi_minus, kind};
    pr.validate();
    return pr;
}

namespace {

template <class F>
auto annotate(std::size_t stage, F&& body) -> decltype(body()) {
    const std::string tag = "stage " + std::to_string(stage) + ": ";
    try {
        return body();
    } catch (const NonConvergenceError& e) {
        throw NonConvergenceError(tag + e.what(), e.history());
    } catch (const WarmStartError& e) {
        throw WarmStartError(tag + e.what(), e.last_residual());
    } catch (const SolverError& e) {
        throw SolverError(tag + e.what(), e.last_residual());
    }
}

bool explicitly_stable(const SpaceTimeGrid& g, double delta) {
    return g.dt() <= g.dx() * g.dx() / (2.0 * delta) && g.dt() < delta;
}

// Grid on which the descent warm start is explicitly stable with margin.
SpaceTimeGrid descent_grid(const Stage& s) {
    const double delta = s.params.delta;
    const int M = std::min(s.grid.M(), std::max(16, static_cast<int>(std::ceil(1.0 / delta))));
    const double dx = 1.0 / M;
    const double T = s.grid.T();
    const int stable = static_cast<int>(std::ceil(3.0 * 2.0 * delta * T / (dx * dx)));
    const int slow = static_cast<int>(std::ceil(2.0 * T / delta));
    return SpaceTimeGrid(M, std::max({s.grid.N(), stable, slow}), T);
}

struct WarmResult {
    PathPair path;
    SpaceTimeGrid grid;
    double K;
};

// Descent on an explicitly stable grid at moderate K, polished by one Newton solve there.
WarmResult descent_route(SeedKind seed, const Stage& s0, const SolverConfig& cfg, SolveReport& rep) {
    Stage ws{descent_grid(s0), s0.params};
    ws.params.K = std::min(s0.params.K, cfg.descent_K);
    const Problem pr = stage_problem(ws, SchemeKind::FE);
    PathPair path = descent_warm_start(make_seed(seed, pr), pr, cfg, &rep.descent_iters);
    path = newton_solve(path, pr, cfg);
    rep.warm_start = "descent";
    // Newton rarely survives a coarsening transfer in time; a second descent on the stage grid does.
    if (s0.grid.N() < ws.grid.N() && explicitly_stable(s0.grid, s0.params.delta)) {
        Stage coarse{s0.grid, ws.params};
        const Problem pc = stage_problem(coarse, SchemeKind::FE);
        PathPair guess = transfer_path(path, ws.grid, pc.grid);
        complete_path(guess, pc);
        int more = 0;
        guess = descent_warm_start(guess, pc, cfg, &more);
        rep.descent_iters += more;
        return {newton_solve(guess, pc, cfg), pc.grid, pc.params.K};
    }
    return {std::move(path), ws.grid, ws.params.K};
}

PathPair solve_stage(const PathPair& guess, const Problem& pr, const SolverConfig& cfg, SolveReport& rep) {
    NewtonRecord rec;
    PathPair out = newton_solve(guess, pr, cfg, &rec);
    rep.newton_iters_per_stage.push_back(rec.iterations);
    rep.residual_history = std::move(rec.residuals);
    rep.change_history = std::move(rec.changes);
    return out;
}

// Raises K geometrically from `K_from` to the stage value; intermediate solves are not reported.
PathPair ramp_K(PathPair path, Problem pr, double K_from, const SolverConfig& cfg) {
    const double K_target = pr.params.K;
    for (double K = K_from; K < K_target; K *= cfg.K_step) {
        pr.params.K = K;
        complete_path(path, pr);
        path = newton_solve(path, pr, cfg);
    }
    return path;
}

// Transfers onto the stage grid and solves there. When Newton fails from the interpolated guess,
// the grid step is halved by inserting an intermediate grid, up to four times.
PathPair transfer_solve(const PathPair& path, const SpaceTimeGrid& from, const Stage& st, SchemeKind kind,
                        const SolverConfig& cfg, SolveReport& rep, double K_from, int depth) {
    const Problem pr = stage_problem(st, kind);
    try {
        PathPair guess = transfer_path(path, from, pr.grid);
        if (K_from > 0.0) guess = ramp_K(std::move(guess), pr, K_from, cfg);
        complete_path(guess, pr);
        return solve_stage(guess, pr, cfg, rep);
    } catch (const SolverError&) {
        const SpaceTimeGrid mid((from.M() + st.grid.M()) / 2, (from.N() + st.grid.N()) / 2, st.grid.T());
        if (depth >= 4 || mid == from || mid == st.grid) throw;
        ++rep.inserted_grids;
        SolveReport scratch;
        const PathPair half = transfer_solve(path, from, {mid, st.params}, kind, cfg, scratch, K_from, depth + 1);
        rep.inserted_grids += scratch.inserted_grids;
        return transfer_solve(half, mid, st, kind, cfg, rep, 0.0, depth + 1);
    }
}

PathPair run_ladder(PathPair path, SpaceTimeGrid from, std::size_t first, SchemeKind kind, const SolverConfig& cfg,
                    SolveReport& rep, double K_from = 0.0) {
    for (std::size_t i = first; i < cfg.ladder.size(); ++i) {
        path = annotate(i, [&] {
            return transfer_solve(path, from, cfg.ladder[i], kind, cfg, rep, i == first ? K_from : 0.0, 0);
        });
        from = cfg.ladder[i].grid;
    }
    const Problem pr = stage_problem(cfg.ladder.back(), kind);
    rep.value = discrete_value(path, kind, pr.target.span(), pr.params, pr.grid);
    rep.residual = scaled_residual(path, pr).max_norm();
    rep.diagnostics = diagnostics(path, pr.params, pr.grid, kind);
    return path;
}

}  // namespace

PathPair continuation_solve(SeedKind seed, SchemeKind kind, const SolverConfig& cfg, SolveReport* report) {
    cfg.validate();
    SolveReport rep;
    const Stage& s0 = cfg.ladder.front();
    PathPair path;
    SpaceTimeGrid from = s0.grid;
    std::size_t next = 0;
    double K_from = 0.0;

    bool done = false;
    if (cfg.warm_start != WarmStartMode::Descent) {
        try {
            annotate(0, [&] {
                const Problem pr = stage_problem(s0, kind);
                const PathPair warm = picard_warm_start(make_seed(seed, pr), pr, cfg, &rep.picard_iters);
                path = solve_stage(warm, pr, cfg, rep);
                return 0;
            });
            rep.warm_start = "picard";
            next = 1;
            done = true;
        } catch (const SolverError&) {
            if (cfg.warm_start == WarmStartMode::Picard) throw;
            rep.newton_iters_per_stage.clear();
        }
    }
    if (!done) {
        WarmResult w = annotate(0, [&] { return descent_route(seed, s0, cfg, rep); });
        path = std::move(w.path);
        from = w.grid;
        K_from = w.K;
    }
    path = run_ladder(std::move(path), from, next, kind, cfg, rep, K_from);
    if (report) *report = std::move(rep);
    return path;
}

PathPair continue_from(const PathPair& path, const SpaceTimeGrid& from, SchemeKind kind, const SolverConfig& cfg,
                       SolveReport* report) {
    cfg.validate();
    path.check(from);
    SolveReport rep;
    rep.warm_start = "transfer";
    PathPair out = run_ladder(path, from, 0, kind, cfg, rep);
    if (report) *report = std::move(rep);
    return out;
}

double fitted_order(const std::vector<double>& history, double floor) {
    std::vector<double> h;
    for (double v : history) {
        if (v > floor) h.push_back(v);
    }
    if (h.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    const double r1 = h[h.size() - 3];
    const double r2 = h[h.size() - 2];
    const double r3 = h[h.size() - 1];
    return std::log(r3 / r2) / std::log(r2 / r1);
}

}  // namespace gltransit
