// Python bindings: stable states, continuation solves, sweeps and the small numerical helpers.

#include "gltransit/experiments.hpp"
#include "gltransit/solver.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace gltransit;

namespace {

py::array_t<double> as_array(std::span<const double> v) {
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

py::array_t<double> as_matrix(std::span<const double> v, std::size_t rows, std::size_t cols) {
    py::array_t<double> a({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array");
    return {a.data(), a.data() + a.size()};
}

ModelParams params(double delta, double K, double T) {
    ModelParams p;
    p.delta = delta;
    p.K = K;
    p.T = T;
    p.validate();
    return p;
}

SolverConfig config(int M, int N, const ModelParams& p, const std::vector<std::pair<int, int>>& ladder) {
    SolverConfig cfg;
    for (auto [m, n] : ladder) cfg.ladder.push_back(Stage{SpaceTimeGrid(m, n, p.T), p});
    cfg.ladder.push_back(Stage{SpaceTimeGrid(M, N, p.T), p});
    cfg.validate();
    return cfg;
}

py::dict solve(int M, int N, double delta, double K, double T, const std::string& scheme, const std::string& seed,
               const std::vector<std::pair<int, int>>& ladder) {
    const ModelParams p = params(delta, K, T);
    const SolverConfig cfg = config(M, N, p, ladder);
    const SchemeKind kind = parse_scheme(scheme);
    SolveReport rep;
    PathPair path;
    {
        py::gil_scoped_release release;
        path = continuation_solve(parse_seed(seed), kind, cfg, &rep);
    }
    const SpaceTimeGrid g(M, N, T);
    py::dict d;
    d["value"] = rep.value;
    d["residual"] = rep.residual;
    std::vector<double> x;
    for (std::size_t i = 0; i < g.interior(); ++i) x.push_back(g.x(i));
    d["x"] = as_array(x);
    d["xi"] = as_matrix(path.xi_all(), path.levels(), path.width());
    d["eta"] = as_matrix(path.eta_all(), path.levels(), path.width());
    d["warm_start"] = rep.warm_start;
    d["newton_iters_per_stage"] = rep.newton_iters_per_stage;
    d["residual_history"] = rep.residual_history;
    d["change_history"] = rep.change_history;
    d["grad_increment"] = rep.diagnostics.grad_increment;
    d["control_bound"] = rep.diagnostics.control_bound;
    d["hamiltonian_drift"] = rep.diagnostics.hamiltonian_drift;
    return d;
}

py::list sweep(const std::string& mode, const std::vector<int>& resolutions, int fixed, double delta, double K,
               double T, const std::vector<std::string>& schemes, const std::vector<std::pair<int, int>>& ladder) {
    SweepSpec s;
    s.mode = parse_sweep_mode(mode);
    s.resolutions = resolutions;
    s.fixed = fixed;
    const ModelParams p = params(delta, K, T);
    if (resolutions.empty()) throw std::invalid_argument("a sweep needs resolutions");
    // Without a ladder the coarsest sweep grid is the single base stage.
    const int r0 = resolutions.front();
    const auto first = s.mode == SweepMode::Dt ? std::make_pair(fixed, r0)
                       : s.mode == SweepMode::Dx ? std::make_pair(r0, fixed)
                                                 : std::make_pair(r0, r0);
    const auto last = ladder.empty() ? first : ladder.back();
    s.base = config(last.first, last.second, p,
                    ladder.empty() ? ladder : std::vector<std::pair<int, int>>(ladder.begin(), ladder.end() - 1));
    s.schemes.clear();
    for (const auto& k : schemes) s.schemes.push_back(parse_scheme(k));
    SweepResult r;
    {
        py::gil_scoped_release release;
        r = run_sweep(s);
    }
    py::list rows;
    for (const auto& row : r.rows) {
        py::dict d;
        d["scheme"] = std::string(to_string(row.scheme));
        d["M"] = row.M;
        d["N"] = row.N;
        d["value"] = row.value;
        d["grad_increment"] = row.diagnostics.grad_increment;
        d["hamiltonian_drift"] = row.diagnostics.hamiltonian_drift;
        rows.append(d);
    }
    py::list fits;
    for (const auto& f : r.fits) {
        py::dict d;
        d["scheme"] = std::string(to_string(f.scheme));
        d["fitted_order"] = f.fitted_order;
        d["slope"] = f.slope;
        d["extrapolated"] = f.extrapolated ? py::cast(*f.extrapolated) : py::none();
        fits.append(d);
    }
    py::list out;
    out.append(rows);
    out.append(fits);
    return out;
}

}  // namespace

PYBIND11_MODULE(gltransit, m) {
    m.doc() = "Optimally controlled transition paths of the 1-D Ginzburg-Landau equation";

    static py::exception<SolverError> solver_error(m, "SolverError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const SolverError& e) {
            py::set_error(solver_error, e.what());
        }
    });

    m.def(
        "stable_states",
        [](int M, double delta) {
            ModelParams p;
            p.delta = delta;
            p.validate();
            const SpaceTimeGrid g(M, 1);
            const StablePair sp = stable_states(p, g);
            return py::make_tuple(as_array(sp.phi_plus.span()), as_array(sp.phi_minus.span()));
        },
        "Stable equilibria (phi_plus, phi_minus) on the interior nodes of an M-interval grid.", py::arg("M"),
        py::arg("delta"));

    m.def("solve", &solve, "Continuation solve; returns value, paths and solver history as a dict.", py::arg("M"),
          py::arg("N"), py::arg("delta") = 0.03, py::arg("K") = 1e9, py::arg("T") = 1.0, py::arg("scheme") = "fe",
          py::arg("seed") = "two_wall", py::arg("ladder") = std::vector<std::pair<int, int>>{});

    m.def("sweep", &sweep, "Convergence sweep; returns (rows, fits). The ladder's last grid is the base stage.",
          py::arg("mode"), py::arg("resolutions"), py::arg("fixed"), py::arg("delta") = 0.03, py::arg("K") = 1e9,
          py::arg("T") = 1.0, py::arg("schemes") = std::vector<std::string>{"fe", "be"},
          py::arg("ladder") = std::vector<std::pair<int, int>>{});

    m.def(
        "norm_l2",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& f, int M) {
            const auto v = to_vector(f);
            return norm_l2(v, SpaceTimeGrid(M, 1));
        },
        py::arg("f"), py::arg("M"));

    m.def(
        "seminorm_h1",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& f, int M) {
            const auto v = to_vector(f);
            return seminorm_h1(v, SpaceTimeGrid(M, 1));
        },
        py::arg("f"), py::arg("M"));

    m.def(
        "potential", [](double phi, int order) { return potential(phi, order, ModelParams{}); }, py::arg("phi"),
        py::arg("order") = 0);

    m.def("transition_probability", &transition_probability, py::arg("action"), py::arg("epsilon"));

    m.def(
        "richardson_extrapolate",
        [](const std::vector<StepValue>& points, std::size_t finest) { return richardson_extrapolate(points, finest); },
        py::arg("points"), py::arg("finest") = 0);
}
