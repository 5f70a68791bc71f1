#include "gltransit/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gltransit {

std::string_view to_string(SchemeKind k) noexcept { return k == SchemeKind::FE ? "FE" : "BE"; }

SchemeKind parse_scheme(std::string_view s) {
    if (s == "FE" || s == "fe") return SchemeKind::FE;
    if (s == "BE" || s == "be") return SchemeKind::BE;
    throw std::invalid_argument("unknown scheme '" + std::string(s) + "' (expected fe or be)");
}

void Problem::validate() const {
    params.validate();
    check_field(start.span(), grid, "start");
    check_field(target.span(), grid, "target");
    if (std::abs(params.T - grid.T()) > 1e-14 * params.T) {
        throw std::invalid_argument("model horizon T does not match the grid horizon");
    }
}

double ResidualVector::max_norm() const { return max_abs(values); }

namespace {

// out = delta D2 f (Dirichlet), fused into callers' loops through this helper.
inline double lap(std::span<const double> f, std::size_t i, double inv_dx2) {
    const double left = i > 0 ? f[i - 1] : 0.0;
    const double right = i + 1 < f.size() ? f[i + 1] : 0.0;
    return inv_dx2 * (left - 2.0 * f[i] + right);
}

// Solves (diag_i) x_i + off (x_{i-1} + x_{i+1}) = rhs_i in place.
void thomas(std::vector<double>& diag, double off, std::span<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = off / diag[i - 1];
        diag[i] -= m * off;
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off * rhs[i + 1]) / diag[i];
}

}  // namespace

Field fe_state_step(std::span<const double> xi_n, std::span<const double> control, const ModelParams& p,
                    const SpaceTimeGrid& g) {
    check_field(xi_n, g, "xi_n");
    check_field(control, g, "control");
    const PotentialDerivs V(p);
    const double inv = 1.0 / (g.dx() * g.dx());
    const double dt = g.dt();
    Field out(xi_n.size());
    for (std::size_t i = 0; i < xi_n.size(); ++i) {
        out[i] = xi_n[i] + dt * (p.delta * lap(xi_n, i, inv) - V.d1(xi_n[i]) / p.delta + control[i]);
    }
    return out;
}

Field fe_dual_step_back(std::span<const double> eta_np1, std::span<const double> xi_n, const ModelParams& p,
                        const SpaceTimeGrid& g) {
    check_field(eta_np1, g, "eta_np1");
    check_field(xi_n, g, "xi_n");
    const PotentialDerivs V(p);
    const double inv = 1.0 / (g.dx() * g.dx());
    const double dt = g.dt();
    Field out(xi_n.size());
    for (std::size_t i = 0; i < xi_n.size(); ++i) {
        out[i] = eta_np1[i] + dt * (p.delta * lap(eta_np1, i, inv) - eta_np1[i] * V.d2(xi_n[i]) / p.delta);
    }
    return out;
}

Field be_state_step(std::span<const double> xi_n, std::span<const double> control, const ModelParams& p,
                    const SpaceTimeGrid& g) {
    check_field(xi_n, g, "xi_n");
    check_field(control, g, "control");
    const PotentialDerivs V(p);
    const double inv = 1.0 / (g.dx() * g.dx());
    const double dt = g.dt();
    const std::size_t n = xi_n.size();
    Field x(std::vector<double>(xi_n.begin(), xi_n.end()));
    std::vector<double> diag(n);
    std::vector<double> r(n);
    double last = 0.0;
    for (int it = 0; it < 60; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = -(x[i] - dt * (p.delta * lap(x.span(), i, inv) - V.d1(x[i]) / p.delta) - xi_n[i] - dt * control[i]);
            diag[i] = 1.0 + dt * (2.0 * p.delta * inv + V.d2(x[i]) / p.delta);
        }
        const double rmax = max_abs(r);
        last = rmax;
        if (rmax <= 1e-14 * (1.0 + std::abs(x[0]))) return x;
        thomas(diag, -dt * p.delta * inv, r);
        for (std::size_t i = 0; i < n; ++i) x[i] += r[i];
        const double smax = max_abs(r);
        if (!std::isfinite(smax)) break;
        if (smax <= 1e-15) return x;
    }
    if (!std::isfinite(last) || last > 1e-8) throw SolverError("implicit state step did not converge", last);
    return x;
}

Field be_dual_step_back(std::span<const double> eta_np1, std::span<const double> xi_np1, const ModelParams& p,
                        const SpaceTimeGrid& g) {
    check_field(eta_np1, g, "eta_np1");
    check_field(xi_np1, g, "xi_np1");
    const PotentialDerivs V(p);
    const double inv = 1.0 / (g.dx() * g.dx());
    const double dt = g.dt();
    const std::size_t n = eta_np1.size();
    std::vector<double> diag(n);
    Field out(std::vector<double>(eta_np1.begin(), eta_np1.end()));
    for (std::size_t i = 0; i < n; ++i) diag[i] = 1.0 + dt * (2.0 * p.delta * inv + V.d2(xi_np1[i]) / p.delta);
    thomas(diag, -dt * p.delta * inv, out.span());
    return out;
}

std::size_t unknown_count(const SpaceTimeGrid& g) { return 2 * static_cast<std::size_t>(g.N()) * g.interior(); }

std::vector<double> pack_unknowns(const PathPair& path, SchemeKind kind) {
    const std::size_t n = path.width();
    const std::size_t N = path.levels() - 1;
    std::vector<double> z(2 * N * n);
    for (std::size_t k = 0; k < N; ++k) {
        auto xi = path.xi(k + 1);
        auto eta = path.eta(kind == SchemeKind::FE ? k + 1 : k);
        std::copy(xi.begin(), xi.end(), z.begin() + static_cast<std::ptrdiff_t>(2 * k * n));
        std::copy(eta.begin(), eta.end(), z.begin() + static_cast<std::ptrdiff_t>((2 * k + 1) * n));
    }
    return z;
}

void complete_path(PathPair& path, const Problem& pr) {
    const auto& g = pr.grid;
    const std::size_t N = static_cast<std::size_t>(g.N());
    std::copy(pr.start.begin(), pr.start.end(), path.xi(0).begin());
    if (pr.kind == SchemeKind::FE) {
        const Field e0 = fe_dual_step_back(path.eta(1), path.xi(0), pr.params, g);
        std::copy(e0.begin(), e0.end(), path.eta(0).begin());
    } else {
        auto xiN = path.xi(N);
        auto etaN = path.eta(N);
        for (std::size_t i = 0; i < xiN.size(); ++i) etaN[i] = 2.0 * pr.params.K * (xiN[i] - pr.target[i]);
    }
}

PathPair unpack_unknowns(std::span<const double> z, const Problem& pr) {
    const auto& g = pr.grid;
    if (z.size() != unknown_count(g)) throw DimensionError("unknown vector has the wrong length");
    const std::size_t n = g.interior();
    PathPair path(g);
    for (std::size_t k = 0; k < static_cast<std::size_t>(g.N()); ++k) {
        auto xi = z.subspan(2 * k * n, n);
        auto eta = z.subspan((2 * k + 1) * n, n);
        std::copy(xi.begin(), xi.end(), path.xi(k + 1).begin());
        std::copy(eta.begin(), eta.end(), path.eta(pr.kind == SchemeKind::FE ? k + 1 : k).begin());
    }
    complete_path(path, pr);
    return path;
}

ResidualVector assemble_residual(const PathPair& path, const Problem& pr) {
    pr.validate();
    path.check(pr.grid);
    const auto& g = pr.grid;
    const auto& p = pr.params;
    const PotentialDerivs V(p);
    const std::size_t n = g.interior();
    const std::size_t N = static_cast<std::size_t>(g.N());
    const double dt = g.dt();
    const double inv = 1.0 / (g.dx() * g.dx());
    const double d = p.delta;
    const double twoK = 2.0 * p.K;

    ResidualVector r;
    r.width = n;
    r.values.assign(2 * N * n, 0.0);
    for (std::size_t k = 0; k < N; ++k) {
        double* state = r.values.data() + 2 * k * n;
        double* dual = state + n;
        auto xk = k == 0 ? pr.start.span() : path.xi(k);
        auto xk1 = path.xi(k + 1);
        if (pr.kind == SchemeKind::FE) {
            auto ek1 = path.eta(k + 1);
            for (std::size_t i = 0; i < n; ++i) {
                state[i] = xk1[i] - xk[i] - dt * (d * lap(xk, i, inv) - V.d1(xk[i]) / d - ek1[i]);
            }
            if (k + 1 < N) {
                auto ek2 = path.eta(k + 2);
                for (std::size_t i = 0; i < n; ++i) {
                    dual[i] = ek1[i] - ek2[i] - dt * (d * lap(ek2, i, inv) - ek2[i] * V.d2(xk1[i]) / d);
                }
            } else {
                for (std::size_t i = 0; i < n; ++i) dual[i] = ek1[i] - twoK * (xk1[i] - pr.target[i]);
            }
        } else {
            auto ek = path.eta(k);
            for (std::size_t i = 0; i < n; ++i) {
                state[i] = xk1[i] - xk[i] - dt * (d * lap(xk1, i, inv) - V.d1(xk1[i]) / d - ek[i]);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double next = k + 1 < N ? path.eta(k + 1)[i] : twoK * (xk1[i] - pr.target[i]);
                dual[i] = ek[i] - next - dt * (d * lap(ek, i, inv) - ek[i] * V.d2(xk1[i]) / d);
            }
        }
    }
    return r;
}

BandedJacobian assemble_jacobian(const PathPair& path, const Problem& pr) {
    pr.validate();
    path.check(pr.grid);
    const auto& g = pr.grid;
    const auto& p = pr.params;
    const PotentialDerivs V(p);
    const std::size_t n = g.interior();
    const std::size_t N = static_cast<std::size_t>(g.N());
    const double dt = g.dt();
    const double inv = 1.0 / (g.dx() * g.dx());
    const double d = p.delta;
    const double twoK = 2.0 * p.K;
    const std::size_t bw = 2 * n + 1;

    BandedJacobian J{BandedMatrix(2 * N * n, bw, bw)};
    auto& A = J.matrix;
    auto sx = [n](std::size_t k) { return 2 * k * n; };      // column/row offset of the state block k
    auto se = [n](std::size_t k) { return 2 * k * n + n; };  // dual block k

    // Adds c * (I) + a * (delta D2 - diag(V''(x)) / delta) to block (row0, col0).
    auto add_operator = [&](std::size_t row0, std::size_t col0, double c, double a, std::span<const double> x) {
        for (std::size_t i = 0; i < n; ++i) {
            A.add(row0 + i, col0 + i, c + a * (-2.0 * d * inv - V.d2(x[i]) / d));
            if (i > 0) A.add(row0 + i, col0 + i - 1, a * d * inv);
            if (i + 1 < n) A.add(row0 + i, col0 + i + 1, a * d * inv);
        }
    };
    auto add_diag = [&](std::size_t row0, std::size_t col0, auto&& value) {
        for (std::size_t i = 0; i < n; ++i) A.add(row0 + i, col0 + i, value(i));
    };

    for (std::size_t k = 0; k < N; ++k) {
        auto xk = k == 0 ? pr.start.span() : path.xi(k);
        auto xk1 = path.xi(k + 1);
        if (pr.kind == SchemeKind::FE) {
            add_diag(sx(k), sx(k), [](std::size_t) { return 1.0; });
            if (k > 0) add_operator(sx(k), sx(k - 1), -1.0, -dt, xk);
            add_diag(sx(k), se(k), [dt](std::size_t) { return dt; });
            if (k + 1 < N) {
                auto ek2 = path.eta(k + 2);
                add_diag(se(k), se(k), [](std::size_t) { return 1.0; });
                add_operator(se(k), se(k + 1), -1.0, -dt, xk1);
                add_diag(se(k), sx(k), [&](std::size_t i) { return dt * ek2[i] * V.d3(xk1[i]) / d; });
            } else {
                add_diag(se(k), se(k), [](std::size_t) { return 1.0; });
                add_diag(se(k), sx(k), [twoK](std::size_t) { return -twoK; });
            }
        } else {
            auto ek = path.eta(k);
            add_operator(sx(k), sx(k), 1.0, -dt, xk1);
            if (k > 0) add_diag(sx(k), sx(k - 1), [](std::size_t) { return -1.0; });
            add_diag(sx(k), se(k), [dt](std::size_t) { return dt; });

            add_operator(se(k), se(k), 1.0, -dt, xk1);
            add_diag(se(k), sx(k), [&](std::size_t i) { return dt * ek[i] * V.d3(xk1[i]) / d; });
            if (k + 1 < N) {
                add_diag(se(k), se(k + 1), [](std::size_t) { return -1.0; });
            } else {
                add_diag(se(k), sx(k), [twoK](std::size_t) { return -twoK; });
            }
        }
    }
    return J;
}

double discrete_value(const PathPair& path, SchemeKind kind, std::span<const double> target, const ModelParams& p,
                      const SpaceTimeGrid& g) {
    path.check(g);
    check_field(target, g, "target");
    const std::size_t N = static_cast<std::size_t>(g.N());
    const std::size_t first = kind == SchemeKind::FE ? 1 : 0;
    double s = 0.0;
    for (std::size_t n = first; n < first + N; ++n) s += dot(path.eta(n), path.eta(n));
    return final_cost(path.xi(N), target, p, g) + 0.5 * g.dt() * g.dx() * s;
}

std::vector<Field> simulate_controls(std::span<const Field> controls, std::span<const double> start,
                                     const ModelParams& p, const SpaceTimeGrid& g) {
    if (controls.size() != static_cast<std::size_t>(g.N())) throw DimensionError("need N control fields");
    check_field(start, g, "start");
    std::vector<Field> xi;
    xi.reserve(g.levels());
    xi.emplace_back(std::vector<double>(start.begin(), start.end()));
    for (const auto& a : controls) xi.push_back(fe_state_step(xi.back().span(), a.span(), p, g));
    return xi;
}

double reduced_value(std::span<const Field> controls, std::span<const double> start, std::span<const double> target,
                     const ModelParams& p, const SpaceTimeGrid& g) {
    const auto xi = simulate_controls(controls, start, p, g);
    double s = 0.0;
    for (const auto& a : controls) s += dot(a.span(), a.span());
    return final_cost(xi.back().span(), target, p, g) + 0.5 * g.dt() * g.dx() * s;
}

std::vector<Field> adjoint_gradient(std::span<const Field> controls, std::span<const double> start,
                                    std::span<const double> target, const ModelParams& p, const SpaceTimeGrid& g) {
    check_field(target, g, "target");
    const auto xi = simulate_controls(controls, start, p, g);
    const std::size_t N = static_cast<std::size_t>(g.N());
    Field eta(g.interior());
    for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = 2.0 * p.K * (xi[N][i] - target[i]);
    std::vector<Field> grad(N);
    const double w = g.dt() * g.dx();
    for (std::size_t n = N; n-- > 0;) {
        // eta currently holds eta^{n+1}
        Field gn(eta.size());
        for (std::size_t i = 0; i < eta.size(); ++i) gn[i] = w * (controls[n][i] + eta[i]);
        grad[n] = std::move(gn);
        eta = fe_dual_step_back(eta.span(), xi[n].span(), p, g);
    }
    return grad;
}

std::vector<Field> controls_from_path(const PathPair& path) {
    std::vector<Field> out;
    out.reserve(path.levels() - 1);
    for (std::size_t n = 1; n < path.levels(); ++n) out.push_back(-1.0 * path.eta_field(n));
    return out;
}

Diagnostics diagnostics(const PathPair& path, const ModelParams& p, const SpaceTimeGrid& g, SchemeKind kind) {
    path.check(g);
    Diagnostics out;
    const std::size_t N = static_cast<std::size_t>(g.N());
    const double dt = g.dt();
    const double dx = g.dx();

    Field diff(g.interior());
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = path.xi(n + 1)[i] - path.xi(n)[i];
        out.grad_increment = std::max(out.grad_increment, seminorm_h1(diff.span(), g) / dt);
    }

    const std::size_t first = kind == SchemeKind::FE ? 1 : 0;
    double control_sq = 0.0;
    for (std::size_t n = 0; n <= N; ++n) out.control_bound = std::max(out.control_bound, norm_l2(path.eta(n), g));
    for (std::size_t n = first; n < first + N; ++n) control_sq += dt * dx * dot(path.eta(n), path.eta(n));

    // a-priori H1 bound: |phi_x(t)|^2 <= |phi0_x|^2 + |phi0|_4^4 / (2 delta^2) - |phi0|^2 / delta^2
    //                                   + |alpha|^2 / delta + 1 / (2 delta)
    auto x0 = path.xi(0);
    double l4 = 0.0;
    for (double v : x0) l4 += v * v * v * v;
    l4 *= dx;
    const double h0 = seminorm_h1(x0, g);
    const double l2 = norm_l2(x0, g);
    const double d = p.delta;
    const double rhs = h0 * h0 + l4 / (2.0 * d * d) - l2 * l2 / (d * d) + control_sq / d + 0.5 / d;
    out.h1_bound_margin.reserve(N + 1);
    for (std::size_t n = 0; n <= N; ++n) {
        const double h = seminorm_h1(path.xi(n), g);
        out.h1_bound_margin.push_back(h * h - rhs);
    }

    // Pairing of the symplectic step: FE H(eta^{n+1}, xi^n), BE H(eta^n, xi^{n+1}).
    auto level_h = [&](std::size_t n) {
        return kind == SchemeKind::FE ? hamiltonian(path.eta(n + 1), path.xi(n), p, g)
                                      : hamiltonian(path.eta(n), path.xi(n + 1), p, g);
    };
    const double h_first = level_h(0);
    for (std::size_t n = 1; n < N; ++n) out.hamiltonian_drift = std::max(out.hamiltonian_drift, std::abs(level_h(n) - h_first));
    return out;
}

}  // namespace gltransit
