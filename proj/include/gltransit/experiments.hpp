#pragma once

#include "gltransit/solver.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gltransit {

/// dxdt: M = N = resolution. dx: M = resolution, N fixed. dt: N = resolution, M fixed.
enum class SweepMode { DxDt, Dx, Dt };

std::string_view to_string(SweepMode m) noexcept;
SweepMode parse_sweep_mode(std::string_view s);

struct SweepSpec {
    SweepMode mode = SweepMode::Dt;
    std::vector<int> resolutions;
    int fixed = 0;                   ///< the held resolution for dx and dt modes
    SolverConfig base;               ///< its last ladder stage supplies delta, K and T
    std::vector<SchemeKind> schemes{SchemeKind::FE, SchemeKind::BE};
    SeedKind seed = SeedKind::TwoWall;
    std::size_t fit_points = 0;      ///< fit over the finest points only; 0 means all

    /// Throws std::invalid_argument unless resolutions are strictly increasing with at least 3 entries.
    void validate() const;

    /// Grid of the i-th resolution.
    SpaceTimeGrid grid(std::size_t i) const;
};

struct SweepRow {
    SweepMode mode = SweepMode::Dt;
    SchemeKind scheme = SchemeKind::FE;
    int M = 0;
    int N = 0;
    double dx = 0.0;
    double dt = 0.0;
    double value = 0.0;
    Diagnostics diagnostics;
    int newton_iters = 0;
};

struct SchemeFit {
    SchemeKind scheme = SchemeKind::FE;
    double fitted_order = 0.0;
    double slope = 0.0;                  ///< affine slope (dt, dxdt) or the coefficient C of C dx^p (dx)
    std::optional<double> extrapolated;  ///< fitted value at step 0
};

struct SweepResult {
    SweepMode mode = SweepMode::Dt;
    std::vector<SweepRow> rows;
    std::vector<SchemeFit> fits;

    const SchemeFit* fit(SchemeKind k) const;
};

/// A sweep stopped early; the rows solved so far are kept.
class SweepError : public std::runtime_error {
public:
    SweepError(const std::string& what, SweepResult partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const SweepResult& partial() const noexcept { return partial_; }

private:
    SweepResult partial_;
};

/// Solves every (resolution, scheme) cell, each resolution warm-started from the previous one,
/// then fits convergence orders. dx mode fits value = a + C dx^p by least squares; dt and dxdt
/// modes extrapolate affinely to step 0 and measure the order against that limit.
SweepResult run_sweep(const SweepSpec& spec);

using StepValue = std::pair<double, double>;

struct AffineFit {
    double intercept = 0.0;
    double slope = 0.0;
};

/// Least-squares line value = intercept + slope * step. Throws std::invalid_argument on
/// fewer than two points or coinciding steps.
AffineFit affine_fit(std::span<const StepValue> points);

/// Intercept of the affine fit over the `finest` smallest steps (0 means all points).
double richardson_extrapolate(std::span<const StepValue> points, std::size_t finest = 0);

struct PowerFit {
    double limit = 0.0;
    double coefficient = 0.0;
    double order = 0.0;
};

/// Least-squares fit value = limit + coefficient * step^order with order in [0.25, 8].
/// Throws std::invalid_argument on fewer than three points.
PowerFit power_fit(std::span<const StepValue> points);

/// Least-squares slope of log|value| against log(step); points with zero value are skipped.
double loglog_slope(std::span<const StepValue> points);

struct ProbeRow {
    int direction_id = 0;
    double h = 0.0;
    double q = 0.0;       ///< u(x0 + h d) + u(x0 - h d) - 2 u(x0)
    double ratio = 0.0;   ///< q / (h^2 |d|_H1^2)
    bool flagged = false; ///< ratio jumped tenfold over the running maximum (basin switch)
};

struct ProbeReport {
    std::vector<ProbeRow> rows;
    std::vector<int> skipped;               ///< directions with a failed solve
    std::vector<std::string> skip_reasons;
    double base_value = 0.0;
    double constant = 0.0;                  ///< largest unflagged ratio
};

/// Second differences of the discrete value in the starting state.
///
/// `base` fixes grid, parameters, target and scheme; its start is the probe centre.
/// `base_solution` solves `base` and seeds every perturbed Newton solve.
ProbeReport semiconcavity_probe(const Problem& base, const PathPair& base_solution, std::span<const Field> directions,
                                std::span<const double> scales, const SolverConfig& cfg);

/// sin(k pi x) sampled on the interior nodes.
Field sine_direction(int k, const SpaceTimeGrid& g);

/// Writes `stem`.csv and `stem`.svg. Throws std::runtime_error when the files cannot be written.
void emit_report(const SweepResult& result, const std::filesystem::path& stem);
void emit_report(const ProbeReport& report, const std::filesystem::path& stem);

/// CSV text of a sweep (header, one row per cell, then fit rows).
std::string sweep_csv(const SweepResult& result);
std::string probe_csv(const ProbeReport& report);

std::string sweep_svg(const SweepResult& result);
std::string probe_svg(const ProbeReport& report);

}  // namespace gltransit
