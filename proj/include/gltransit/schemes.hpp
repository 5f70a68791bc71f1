#pragma once

#include "gltransit/banded.hpp"
#include "gltransit/grid.hpp"
#include "gltransit/model.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace gltransit {

/// Symplectic Forward Euler (explicit in the state) or Backward Euler (implicit in the state).
enum class SchemeKind { FE, BE };

std::string_view to_string(SchemeKind k) noexcept;
SchemeKind parse_scheme(std::string_view s);

/// The data that fixes one discrete transition problem.
struct Problem {
    ModelParams params;
    SpaceTimeGrid grid;
    Field start;   ///< xi^0
    Field target;  ///< the final cost pulls xi^N toward this field
    SchemeKind kind = SchemeKind::FE;

    void validate() const;
};

/// Stacked residual, 2N blocks of M-1 values ordered (state_0, dual_0, state_1, dual_1, ...).
struct ResidualVector {
    std::size_t width = 0;
    std::vector<double> values;

    std::size_t blocks() const noexcept { return width ? values.size() / width : 0; }
    std::span<const double> state(std::size_t k) const { return {values.data() + 2 * k * width, width}; }
    std::span<const double> dual(std::size_t k) const { return {values.data() + (2 * k + 1) * width, width}; }
    double max_norm() const;
};

/// Exact Jacobian of the stacked residual in banded storage.
struct BandedJacobian {
    BandedMatrix matrix;
    std::size_t bandwidth() const noexcept { return matrix.lower(); }
};

/// xi^{n+1} = xi^n + dt (delta D2 xi^n - V'(xi^n)/delta + alpha^n).
Field fe_state_step(std::span<const double> xi_n, std::span<const double> control, const ModelParams& p,
                    const SpaceTimeGrid& g);

/// eta^n = eta^{n+1} + dt (delta D2 eta^{n+1} - eta^{n+1} * V''(xi^n) / delta).
Field fe_dual_step_back(std::span<const double> eta_np1, std::span<const double> xi_n, const ModelParams& p,
                        const SpaceTimeGrid& g);

/// Implicit state step of the Backward Euler scheme:
/// xi^{n+1} - dt (delta D2 xi^{n+1} - V'(xi^{n+1})/delta) = xi^n + dt alpha^n, solved by Newton.
Field be_state_step(std::span<const double> xi_n, std::span<const double> control, const ModelParams& p,
                    const SpaceTimeGrid& g);

/// Implicit dual step of the Backward Euler scheme:
/// eta^n - dt (delta D2 eta^n - eta^n * V''(xi^{n+1}) / delta) = eta^{n+1}.
Field be_dual_step_back(std::span<const double> eta_np1, std::span<const double> xi_np1, const ModelParams& p,
                        const SpaceTimeGrid& g);

/// Number of unknowns 2N(M-1).
std::size_t unknown_count(const SpaceTimeGrid& g);

/// Unknowns, interleaved per time level: FE (xi^{k+1}, eta^{k+1}), BE (xi^{k+1}, eta^k), k = 0..N-1.
std::vector<double> pack_unknowns(const PathPair& path, SchemeKind kind);

/// Inverse of pack_unknowns. Sets xi^0 = start and fills the dual level the scheme does not solve
/// for (FE: eta^0 by one more dual step, BE: eta^N from the terminal condition).
PathPair unpack_unknowns(std::span<const double> z, const Problem& pr);

/// Fills xi^0 and the dual level that is not an unknown of the scheme.
void complete_path(PathPair& path, const Problem& pr);

ResidualVector assemble_residual(const PathPair& path, const Problem& pr);
BandedJacobian assemble_jacobian(const PathPair& path, const Problem& pr);

/// K dx ||xi^N - target||^2 + dt dx sum ||eta^n||^2 / 2, summed over n=1..N (FE) or n=0..N-1 (BE).
double discrete_value(const PathPair& path, SchemeKind kind, std::span<const double> target, const ModelParams& p,
                      const SpaceTimeGrid& g);

/// Forward-simulates the FE state under controls alpha^0..alpha^{N-1}; returns xi^0..xi^N.
std::vector<Field> simulate_controls(std::span<const Field> controls, std::span<const double> start,
                                     const ModelParams& p, const SpaceTimeGrid& g);

/// Reduced objective K dx ||xi^N - target||^2 + dt dx sum_n ||alpha^n||^2 / 2 of a control sequence.
double reduced_value(std::span<const Field> controls, std::span<const double> start, std::span<const double> target,
                     const ModelParams& p, const SpaceTimeGrid& g);

/// Gradient of reduced_value: dt dx (alpha^n + eta^{n+1}) with eta from the backward dual sweep.
std::vector<Field> adjoint_gradient(std::span<const Field> controls, std::span<const double> start,
                                    std::span<const double> target, const ModelParams& p, const SpaceTimeGrid& g);

/// Controls alpha^n = -eta^{n+1} carried by a solved FE path.
std::vector<Field> controls_from_path(const PathPair& path);

struct Diagnostics {
    double grad_increment = 0.0;     ///< max_n |xi^{n+1} - xi^n|_{H1} / dt
    double control_bound = 0.0;      ///< max_n ||eta^n||
    std::vector<double> h1_bound_margin;  ///< a-priori H1 bound, lhs - rhs per level (<= 0 when it holds)
    double hamiltonian_drift = 0.0;  ///< max_n |H_n - H_0| along the path
};

Diagnostics diagnostics(const PathPair& path, const ModelParams& p, const SpaceTimeGrid& g,
                        SchemeKind kind = SchemeKind::FE);

}  // namespace gltransit
