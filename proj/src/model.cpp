#include "gltransit/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace gltransit {

void ModelParams::validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be positive");
    if (!(K > 0.0) || !std::isfinite(K)) throw std::invalid_argument("K must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("T must be positive");
    if (cutoff_s && !(*cutoff_s > 1.0)) throw std::invalid_argument("cutoff_s must exceed 1");
    if (epsilon && !(*epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

namespace {

double raw_potential(double phi, int order) {
    switch (order) {
        case 0: {
            const double q = phi * phi - 1.0;
            return 0.25 * q * q;
        }
        case 1: return dV(phi);
        case 2: return d2V(phi);
        case 3: return d3V(phi);
        default: throw std::invalid_argument("potential order must be 0..3, got " + std::to_string(order));
    }
}

// Modified potential for phi >= s; the negative side follows from V being even.
double blended_potential(double phi, int order, double s) {
    const double v0 = raw_potential(s, 0);
    const double v1 = raw_potential(s, 1);
    const double v2 = raw_potential(s, 2);
    const double u = std::min(phi - s, 1.0);
    // V'' = v2 (1 - u) on the patch
    const double w0 = v0 + v1 * u + v2 * (u * u / 2.0 - u * u * u / 6.0);
    const double w1 = v1 + v2 * (u - u * u / 2.0);
    const double w2 = v2 * (1.0 - u);
    if (phi - s <= 1.0) {
        switch (order) {
            case 0: return w0;
            case 1: return w1;
            case 2: return w2;
            default: return -v2;
        }
    }
    switch (order) {
        case 0: return w0 + w1 * (phi - s - 1.0);
        case 1: return w1;
        default: return 0.0;
    }
}

}  // namespace

double potential(double phi, int order, const ModelParams& p) {
    if (order < 0 || order > 3) throw std::invalid_argument("potential order must be 0..3, got " + std::to_string(order));
    if (!p.cutoff_s || std::abs(phi) <= *p.cutoff_s) return raw_potential(phi, order);
    const double s = *p.cutoff_s;
    const double v = blended_potential(std::abs(phi), order, s);
    // even orders are even functions, odd orders are odd
    return (phi < 0.0 && order % 2 == 1) ? -v : v;
}

double final_cost(std::span<const double> phi_T, std::span<const double> target, const ModelParams& p,
                  const SpaceTimeGrid& g) {
    check_field(phi_T, g, "phi_T");
    check_field(target, g, "target");
    double s = 0.0;
    for (std::size_t i = 0; i < phi_T.size(); ++i) {
        const double d = phi_T[i] - target[i];
        s += d * d;
    }
    return p.K * g.dx() * s;
}

double running_cost(std::span<const double> alpha, const SpaceTimeGrid& g) {
    const double n = norm_l2(alpha, g);
    return 0.5 * n * n;
}

double hamiltonian(std::span<const double> lambda, std::span<const double> phi, const ModelParams& p,
                   const SpaceTimeGrid& g) {
    check_field(lambda, g, "lambda");
    check_field(phi, g, "phi");
    const PotentialDerivs V(p);
    const Field lap = d2_apply(phi, g);
    double diffusion = 0.0;
    double reaction = 0.0;
    double kinetic = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        diffusion += lap[i] * lambda[i];
        reaction += lambda[i] * V.d1(phi[i]);
        kinetic += lambda[i] * lambda[i];
    }
    const double dx = g.dx();
    return p.delta * dx * diffusion - dx * reaction / p.delta - 0.5 * dx * kinetic;
}

double energy(std::span<const double> f, const ModelParams& p, const SpaceTimeGrid& g) {
    check_field(f, g);
    const double dx = g.dx();
    double grad = 0.0;
    double pot = 0.0;
    double prev = 0.0;
    for (double v : f) {
        grad += (v - prev) * (v - prev);
        pot += potential(v, 0, p);
        prev = v;
    }
    grad += prev * prev;
    // V(0) = 1/4 at the two boundary nodes is a constant offset shared by all fields; omitted
    return dx * (0.5 * p.delta * grad / (dx * dx) + pot / p.delta);
}

Field equilibrium_residual(std::span<const double> xi, const ModelParams& p, const SpaceTimeGrid& g) {
    check_field(xi, g, "xi");
    const PotentialDerivs V(p);
    Field r = d2_apply(xi, g);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = p.delta * r[i] - V.d1(xi[i]) / p.delta;
    return r;
}

namespace {

// Solves a symmetric tridiagonal system (diag, constant off-diagonal) in place (Thomas algorithm).
bool solve_tridiagonal(std::vector<double> diag, double off, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0) return false;
        const double m = off / diag[i - 1];
        diag[i] -= m * off;
        rhs[i] -= m * rhs[i - 1];
    }
    if (diag[n - 1] == 0.0) return false;
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off * rhs[i + 1]) / diag[i];
    return std::all_of(rhs.begin(), rhs.end(), [](double v) { return std::isfinite(v); });
}

Field equilibrium_seed(const ModelParams& p, const SpaceTimeGrid& g) {
    const double w = std::sqrt(2.0) * p.delta;
    Field seed(g.interior());
    for (std::size_t i = 0; i < seed.size(); ++i) {
        const double x = g.x(i);
        seed[i] = std::min(1.0, std::tanh(x / w) * std::tanh((1.0 - x) / w));
    }
    return seed;
}

std::optional<Field> newton_equilibrium(Field xi, const ModelParams& p, const SpaceTimeGrid& g, double tol) {
    const PotentialDerivs V(p);
    const double dx = g.dx();
    const double off = p.delta / (dx * dx);
    double res = norm_l2(equilibrium_residual(xi, p, g).span(), g);
    for (int it = 0; it < 100 && res > tol; ++it) {
        const Field r = equilibrium_residual(xi, p, g);
        std::vector<double> diag(xi.size());
        std::vector<double> step(r.begin(), r.end());
        for (std::size_t i = 0; i < xi.size(); ++i) {
            diag[i] = -2.0 * off - V.d2(xi[i]) / p.delta;
            step[i] = -step[i];
        }
        if (!solve_tridiagonal(diag, off, step)) return std::nullopt;
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k, lambda *= 0.5) {
            Field trial = xi;
            for (std::size_t i = 0; i < xi.size(); ++i) trial[i] += lambda * step[i];
            const double tr = norm_l2(equilibrium_residual(trial, p, g).span(), g);
            if (std::isfinite(tr) && tr < res) {
                xi = std::move(trial);
                res = tr;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (!(res <= tol)) return std::nullopt;
    return xi;
}

}  // namespace

Field gradient_flow_equilibrium(Field phi, const ModelParams& p, const SpaceTimeGrid& g, double tol,
                                std::size_t max_steps) {
    check_field(phi.span(), g);
    const PotentialDerivs V(p);
    const double dx = g.dx();
    const double tau = std::min(dx * dx / (4.0 * p.delta), p.delta / 4.0);
    Field lap(phi.size());
    double res = 0.0;
    for (std::size_t step = 0; step < max_steps; ++step) {
        d2_apply(phi.span(), dx, lap.span());
        double s = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            const double r = p.delta * lap[i] - V.d1(phi[i]) / p.delta;
            s += r * r;
            phi[i] += tau * r;
        }
        res = std::sqrt(dx * s);
        if (res <= tol) return phi;
    }
    throw SolverError("gradient flow did not reach the equilibrium tolerance", res);
}

StablePair stable_states(const ModelParams& p, const SpaceTimeGrid& g, double tol) {
    p.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("stable_states: tol must be positive");
    const Field seed = equilibrium_seed(p, g);
    auto plus = newton_equilibrium(seed, p, g, tol);
    if (!plus || *std::min_element(plus->begin(), plus->end()) < 0.0) {
        // Relax most of the way by gradient flow, then polish with Newton.
        Field relaxed = gradient_flow_equilibrium(seed, p, g, std::max(tol, 1e-6));
        plus = newton_equilibrium(relaxed, p, g, tol);
        if (!plus) plus = gradient_flow_equilibrium(std::move(relaxed), p, g, tol);
    }
    StablePair out;
    out.residual = norm_l2(equilibrium_residual(plus->span(), p, g).span(), g);
    out.phi_plus = std::move(*plus);
    out.phi_minus = -1.0 * out.phi_plus;
    return out;
}

double action_value(const PathPair& path, const ModelParams& p, const SpaceTimeGrid& g) {
    (void)p;
    path.check(g);
    double s = 0.0;
    for (std::size_t n = 1; n < path.levels(); ++n) s += dot(path.eta(n), path.eta(n));
    return 0.5 * g.dt() * g.dx() * s;
}

double transition_probability(double action, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("transition_probability: epsilon must be positive");
    if (action < 0.0) throw std::invalid_argument("transition_probability: action must be nonnegative");
    return std::exp(-action / epsilon);
}

}  // namespace gltransit
