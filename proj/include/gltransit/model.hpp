#pragma once

#include "gltransit/grid.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace gltransit {

/// Iterative method failed to reach its tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double last_residual)
        : std::runtime_error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

struct ModelParams {
    double delta = 0.03;                ///< diffusivity
    double K = 1e9;                     ///< terminal penalty weight
    double T = 1.0;                     ///< horizon
    std::optional<double> cutoff_s;     ///< potential is modified outside [-s, s] when set
    std::optional<double> epsilon;      ///< noise strength, only used for probability reporting

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// Double-well potential V(phi) = (phi^2 - 1)^2 / 4 and its derivatives up to order 3.
///
/// With a cutoff s the potential is kept unchanged on [-s, s]. On [s, s+1] V'' decays
/// linearly to zero, so V is C^2 and grows linearly beyond s+1 (mirrored for phi < -s).
double potential(double phi, int order, const ModelParams& p);

/// Raw quartic and derivatives, no cutoff. Hot loops use these.
inline double dV(double phi) noexcept { return phi * phi * phi - phi; }
inline double d2V(double phi) noexcept { return 3.0 * phi * phi - 1.0; }
inline double d3V(double phi) noexcept { return 6.0 * phi; }

/// Pointwise V', V'', V''' honoring the cutoff when present.
struct PotentialDerivs {
    explicit PotentialDerivs(const ModelParams& p) : p_(&p), raw_(!p.cutoff_s) {}
    double d1(double phi) const { return raw_ ? dV(phi) : potential(phi, 1, *p_); }
    double d2(double phi) const { return raw_ ? d2V(phi) : potential(phi, 2, *p_); }
    double d3(double phi) const { return raw_ ? d3V(phi) : potential(phi, 3, *p_); }

private:
    const ModelParams* p_;
    bool raw_;
};

/// K * ||phi_T - target||^2 in the discrete L2 norm.
double final_cost(std::span<const double> phi_T, std::span<const double> target, const ModelParams& p,
                  const SpaceTimeGrid& g);

/// ||alpha||^2 / 2 in the discrete L2 norm.
double running_cost(std::span<const double> alpha, const SpaceTimeGrid& g);

/// H(lambda, phi) = delta dx (D2 phi, lambda) - dx (lambda, V'(phi)) / delta - ||lambda||^2 / 2.
double hamiltonian(std::span<const double> lambda, std::span<const double> phi, const ModelParams& p,
                   const SpaceTimeGrid& g);

/// Ginzburg-Landau energy dx * sum (delta/2) ((f_{i+1}-f_i)/dx)^2 + V(f_i) / delta.
double energy(std::span<const double> f, const ModelParams& p, const SpaceTimeGrid& g);

struct StablePair {
    Field phi_plus;
    Field phi_minus;
    double residual = 0.0;
};

/// Residual delta D2 xi - V'(xi) / delta of the equilibrium equation.
Field equilibrium_residual(std::span<const double> xi, const ModelParams& p, const SpaceTimeGrid& g);

/// Nonzero equilibria xi_+ >= 0 and xi_- = -xi_+ of the discrete gradient flow.
///
/// Damped Newton on the tridiagonal equilibrium system, started from a product of
/// half-wall tanh profiles; falls back to explicit gradient flow when Newton stalls.
/// Throws SolverError if neither reaches `tol` in the discrete L2 norm.
StablePair stable_states(const ModelParams& p, const SpaceTimeGrid& g, double tol = 1e-12);

/// Explicit gradient flow phi <- phi + tau (delta D2 phi - V'(phi)/delta) with tau = dx^2 / (4 delta).
Field gradient_flow_equilibrium(Field start, const ModelParams& p, const SpaceTimeGrid& g, double tol,
                                std::size_t max_steps = 50'000'000);

/// Running-cost part dt * dx * sum_{n=1}^{N} ||eta^n||_2^2 / 2 of a transition path.
double action_value(const PathPair& path, const ModelParams& p, const SpaceTimeGrid& g);

/// Large-deviation estimate exp(-action / epsilon).
double transition_probability(double action, double epsilon);

}  // namespace gltransit
