#include "gltransit/experiments.hpp"

#include "gltransit/io.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace gltransit {

std::string_view to_string(SweepMode m) noexcept {
    switch (m) {
        case SweepMode::DxDt: return "dxdt";
        case SweepMode::Dx: return "dx";
        default: return "dt";
    }
}

SweepMode parse_sweep_mode(std::string_view s) {
    if (s == "dxdt") return SweepMode::DxDt;
    if (s == "dx") return SweepMode::Dx;
    if (s == "dt") return SweepMode::Dt;
    throw std::invalid_argument("unknown sweep mode '" + std::string(s) + "' (expected dxdt, dx or dt)");
}

void SweepSpec::validate() const {
    if (resolutions.size() < 3) throw std::invalid_argument("a sweep needs at least 3 resolutions");
    for (std::size_t i = 0; i < resolutions.size(); ++i) {
        if (resolutions[i] < 1) throw std::invalid_argument("resolutions must be positive");
        if (i > 0 && resolutions[i] <= resolutions[i - 1]) {
            throw std::invalid_argument("resolutions must be strictly increasing");
        }
    }
    if (mode != SweepMode::DxDt && fixed < 1) throw std::invalid_argument("the fixed resolution must be positive");
    if (schemes.empty()) throw std::invalid_argument("a sweep needs at least one scheme");
    if (fit_points == 1) throw std::invalid_argument("fit_points must be 0 or at least 2");
    base.validate();
}

SpaceTimeGrid SweepSpec::grid(std::size_t i) const {
    const double T = base.ladder.back().params.T;
    const int r = resolutions.at(i);
    switch (mode) {
        case SweepMode::DxDt: return SpaceTimeGrid(r, r, T);
        case SweepMode::Dx: return SpaceTimeGrid(r, fixed, T);
        default: return SpaceTimeGrid(fixed, r, T);
    }
}

const SchemeFit* SweepResult::fit(SchemeKind k) const {
    for (const auto& f : fits) {
        if (f.scheme == k) return &f;
    }
    return nullptr;
}

AffineFit affine_fit(std::span<const StepValue> points) {
    if (points.size() < 2) throw std::invalid_argument("affine fit needs at least two points");
    const double n = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : points) {
        sx += x;
        sy += y;
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("affine fit needs distinct steps");
    const double b = sxy / sxx;
    return {my - b * mx, b};
}

namespace {

// The `count` points with the smallest steps (all when count is 0).
std::vector<StepValue> finest(std::span<const StepValue> points, std::size_t count) {
    std::vector<StepValue> v(points.begin(), points.end());
    std::sort(v.begin(), v.end());
    if (count > 0 && count < v.size()) v.resize(count);
    return v;
}

}  // namespace

double richardson_extrapolate(std::span<const StepValue> points, std::size_t count) {
    const auto v = finest(points, count);
    return affine_fit(v).intercept;
}

double loglog_slope(std::span<const StepValue> points) {
    std::vector<StepValue> logs;
    for (const auto& [x, y] : points) {
        if (y != 0.0 && x > 0.0) logs.emplace_back(std::log(x), std::log(std::abs(y)));
    }
    if (logs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return affine_fit(logs).slope;
}

PowerFit power_fit(std::span<const StepValue> points) {
    if (points.size() < 3) throw std::invalid_argument("power fit needs at least three points");
    // For fixed order the limit and coefficient are a linear least-squares problem.
    auto solve = [&](double p) {
        std::vector<StepValue> t;
        for (const auto& [x, y] : points) t.emplace_back(std::pow(x, p), y);
        const AffineFit a = affine_fit(t);
        double sse = 0.0;
        for (const auto& [x, y] : t) sse += (y - a.intercept - a.slope * x) * (y - a.intercept - a.slope * x);
        return std::make_pair(a, sse);
    };
    constexpr double lo = 0.25, hi = 8.0, step = 0.05;
    double best = lo;
    double best_sse = std::numeric_limits<double>::infinity();
    for (double p = lo; p <= hi + 1e-12; p += step) {
        const double sse = solve(p).second;
        if (sse < best_sse) {
            best_sse = sse;
            best = p;
        }
    }
    const auto [p, sse] = boost::math::tools::brent_find_minima([&](double q) { return solve(q).second; },
                                                                std::max(lo, best - step), std::min(hi, best + step), 40);
    (void)sse;
    const AffineFit a = solve(p).first;
    return {a.intercept, a.slope, p};
}

namespace {

double step_of(const SweepRow& r) { return r.mode == SweepMode::Dt ? r.dt : r.dx; }

SchemeFit fit_scheme(SweepMode mode, SchemeKind k, const std::vector<SweepRow>& rows, std::size_t count) {
    SchemeFit f;
    f.scheme = k;
    f.fitted_order = std::numeric_limits<double>::quiet_NaN();
    f.slope = std::numeric_limits<double>::quiet_NaN();
    std::vector<StepValue> pts;
    for (const auto& r : rows) {
        if (r.scheme == k) pts.emplace_back(step_of(r), r.value);
    }
    std::sort(pts.begin(), pts.end());
    if (mode == SweepMode::Dx) {
        const auto used = finest(pts, count);
        if (used.size() < 3) return f;
        const PowerFit pf = power_fit(used);
        f.fitted_order = pf.order;
        f.slope = pf.coefficient;
        f.extrapolated = pf.limit;
        return f;
    }
    if (pts.size() < 2) return f;
    const auto used = finest(pts, count);
    const AffineFit a = affine_fit(used);
    f.extrapolated = a.intercept;
    f.slope = a.slope;
    std::vector<StepValue> err;
    for (const auto& [x, y] : used) err.emplace_back(x, y - a.intercept);
    f.fitted_order = loglog_slope(err);
    return f;
}

void finalize(SweepResult& res, const SweepSpec& spec) {
    const auto rank = [&](const SweepRow& r) {
        const int res_key = spec.mode == SweepMode::Dt ? r.N : r.M;
        return std::make_pair(res_key, static_cast<int>(r.scheme));
    };
    std::stable_sort(res.rows.begin(), res.rows.end(),
                     [&](const SweepRow& a, const SweepRow& b) { return rank(a) < rank(b); });
    res.fits.clear();
    for (SchemeKind k : spec.schemes) res.fits.push_back(fit_scheme(spec.mode, k, res.rows, spec.fit_points));
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    SweepResult res;
    res.mode = spec.mode;
    const ModelParams params = spec.base.ladder.back().params;
    for (SchemeKind kind : spec.schemes) {
        PathPair prev;
        std::optional<SpaceTimeGrid> prev_grid;
        for (std::size_t i = 0; i < spec.resolutions.size(); ++i) {
            const SpaceTimeGrid g = spec.grid(i);
            SolverConfig cfg = spec.base;
            cfg.ladder.pop_back();
            SolveReport rep;
            try {
                if (!prev_grid) {
                    cfg.ladder.push_back({g, params});
                    prev = continuation_solve(spec.seed, kind, cfg, &rep);
                } else {
                    cfg.ladder = {{g, params}};
                    prev = continue_from(prev, *prev_grid, kind, cfg, &rep);
                }
            } catch (const std::exception& e) {
                finalize(res, spec);
                throw SweepError(std::string(to_string(kind)) + " M=" + std::to_string(g.M()) +
                                     " N=" + std::to_string(g.N()) + ": " + e.what(),
                                 std::move(res));
            }
            prev_grid = g;
            SweepRow row;
            row.mode = spec.mode;
            row.scheme = kind;
            row.M = g.M();
            row.N = g.N();
            row.dx = g.dx();
            row.dt = g.dt();
            row.value = rep.value;
            row.diagnostics = rep.diagnostics;
            row.newton_iters = rep.newton_iters_per_stage.empty() ? 0 : rep.newton_iters_per_stage.back();
            res.rows.push_back(std::move(row));
        }
    }
    finalize(res, spec);
    return res;
}

Field sine_direction(int k, const SpaceTimeGrid& g) {
    Field d(g.interior());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::sin(k * std::numbers::pi * g.x(i));
    return d;
}

ProbeReport semiconcavity_probe(const Problem& base, const PathPair& base_solution, std::span<const Field> directions,
                                std::span<const double> scales, const SolverConfig& cfg) {
    base.validate();
    base_solution.check(base.grid);
    const auto& g = base.grid;
    for (const auto& d : directions) {
        check_field(d.span(), g, "direction");
        if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) {
            throw std::invalid_argument("probe directions must be nonzero");
        }
    }
    for (double h : scales) {
        if (!(h > 0.0)) throw std::invalid_argument("probe scales must be positive");
    }
    ProbeReport rep;
    const PathPair centre = newton_solve(base_solution, base, cfg);
    const double u0 = discrete_value(centre, base.kind, base.target.span(), base.params, g);
    rep.base_value = u0;

    auto value_from = [&](const Field& start) {
        Problem pr = base;
        pr.start = start;
        const PathPair sol = newton_solve(centre, pr, cfg);
        return discrete_value(sol, pr.kind, pr.target.span(), pr.params, g);
    };

    double running = 0.0;
    bool have_running = false;
    for (std::size_t id = 0; id < directions.size(); ++id) {
        const Field& d = directions[id];
        const double s = seminorm_h1(d.span(), g);
        std::vector<ProbeRow> rows;
        try {
            for (double h : scales) {
                const double up = value_from(base.start + h * d);
                const double down = value_from(base.start - h * d);
                ProbeRow row;
                row.direction_id = static_cast<int>(id);
                row.h = h;
                row.q = up + down - 2.0 * u0;
                row.ratio = row.q / (h * h * s * s);
                rows.push_back(row);
            }
        } catch (const SolverError& e) {
            rep.skipped.push_back(static_cast<int>(id));
            rep.skip_reasons.emplace_back(e.what());
            continue;
        }
        for (auto& row : rows) {
            if (have_running && running > 0.0 && row.ratio > 10.0 * running) {
                row.flagged = true;
            } else {
                running = have_running ? std::max(running, row.ratio) : row.ratio;
                have_running = true;
            }
            rep.rows.push_back(row);
        }
    }
    rep.constant = have_running ? running : 0.0;
    return rep;
}

std::string sweep_csv(const SweepResult& result) {
    std::string out = "mode,scheme,M,N,dx,dt,value,grad_increment,control_bound,hamiltonian_drift,newton_iters\n";
    for (const auto& r : result.rows) {
        out += std::string(to_string(r.mode)) + ',' + std::string(to_string(r.scheme)) + ',' + std::to_string(r.M) +
               ',' + std::to_string(r.N) + ',' + format17(r.dx) + ',' + format17(r.dt) + ',' + format17(r.value) +
               ',' + format17(r.diagnostics.grad_increment) + ',' + format17(r.diagnostics.control_bound) + ',' +
               format17(r.diagnostics.hamiltonian_drift) + ',' + std::to_string(r.newton_iters) + '\n';
    }
    if (result.rows.empty()) return out;
    // summary rows name the fitted quantity in the mode column and carry it in the value column
    for (const auto& f : result.fits) {
        const std::string scheme(to_string(f.scheme));
        out += "fitted_order," + scheme + ",,,,," + format17(f.fitted_order) + ",,,,\n";
        if (f.extrapolated) {
            out += "extrapolated," + scheme + ",,,,," + format17(*f.extrapolated) + ",,,,\n";
            out += "slope," + scheme + ",,,,," + format17(f.slope) + ",,,,\n";
        }
    }
    return out;
}

std::string probe_csv(const ProbeReport& report) {
    std::string out = "direction_id,h,q,ratio,flagged\n";
    for (const auto& r : report.rows) {
        out += std::to_string(r.direction_id) + ',' + format17(r.h) + ',' + format17(r.q) + ',' + format17(r.ratio) +
               ',' + (r.flagged ? "1" : "0") + '\n';
    }
    return out;
}

namespace {

struct Series {
    std::string label;
    std::vector<StepValue> points;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Self-contained line plot; data is repeated in comments so the numbers survive without the CSV.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, bool logx, bool logy) {
    constexpr double W = 640, H = 420, L = 80, R = 20, Tp = 40, B = 60;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    auto tx = [&](double v) { return logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return logy ? std::log10(std::abs(v)) : v; };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if ((logx && !(x > 0.0)) || (logy && y == 0.0)) continue;
            x0 = std::min(x0, tx(x));
            x1 = std::max(x1, tx(x));
            y0 = std::min(y0, ty(y));
            y1 = std::max(y1, ty(y));
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - Tp - B); };

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n";
    out += "<!-- " + title + " -->\n";
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) out += "<!-- data " + s.label + " " + format17(x) + " " + format17(y) + " -->\n";
    }
    out += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"420\" fill=\"white\"/>\n";
    out += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" + title + "</text>\n";
    out += "<line x1=\"" + num(L) + "\" y1=\"" + num(H - B) + "\" x2=\"" + num(W - R) + "\" y2=\"" + num(H - B) +
           "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + num(L) + "\" y1=\"" + num(Tp) + "\" x2=\"" + num(L) + "\" y2=\"" + num(H - B) +
           "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = x0 + (x1 - x0) * k / 4.0;
        const double fy = y0 + (y1 - y0) * k / 4.0;
        const double sx = L + (W - L - R) * k / 4.0;
        const double sy = H - B - (H - Tp - B) * k / 4.0;
        out += "<text x=\"" + num(sx) + "\" y=\"" + num(H - B + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               tick(logx ? std::pow(10.0, fx) : fx) + "</text>\n";
        out += "<text x=\"" + num(L - 6) + "\" y=\"" + num(sy + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               tick(logy ? std::pow(10.0, fy) : fy) + "</text>\n";
    }
    out += "<text x=\"" + num((L + W - R) / 2) + "\" y=\"" + num(H - 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + xlabel + "</text>\n";
    out += "<text x=\"18\" y=\"" + num((Tp + H - B) / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\" transform=\"rotate(-90 18 " + num((Tp + H - B) / 2) + ")\">" + ylabel + "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* c = colors[si % 6];
        std::string pts;
        for (const auto& [x, y] : s.points) {
            if ((logx && !(x > 0.0)) || (logy && y == 0.0)) continue;
            pts += num(px(x)) + "," + num(py(y)) + " ";
            out += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"3\" fill=\"" + c + "\"/>\n";
        }
        if (!pts.empty()) pts.pop_back();
        out += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        out += "<text x=\"" + num(W - R - 120) + "\" y=\"" + num(Tp + 16 + 16 * si) + "\" fill=\"" + c +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + s.label + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace

std::string sweep_svg(const SweepResult& result) {
    std::vector<Series> series;
    for (const auto& f : result.fits) {
        Series s;
        s.label = std::string(to_string(f.scheme));
        std::vector<StepValue> pts;
        for (const auto& r : result.rows) {
            if (r.scheme == f.scheme) pts.emplace_back(step_of(r), r.value);
        }
        std::sort(pts.begin(), pts.end());
        if (result.mode == SweepMode::Dx) {
            const double ref = f.extrapolated.value_or(pts.front().second);
            for (const auto& [x, y] : pts) {
                if (y != ref) s.points.emplace_back(x, std::abs(y - ref));
            }
            s.label += " order " + tick(f.fitted_order);
        } else {
            s.points = pts;
            if (f.extrapolated) {
                s.points.insert(s.points.begin(), {0.0, *f.extrapolated});
                s.label += " limit " + tick(*f.extrapolated);
            }
        }
        series.push_back(std::move(s));
    }
    if (result.mode == SweepMode::Dx) {
        return svg_plot("value error against the fitted limit", "dx", "|value - limit|", series, true, true);
    }
    const std::string step = result.mode == SweepMode::Dt ? "dt" : "dx = dt";
    return svg_plot("value against " + step + " with affine extrapolation", step, "value", series, false, false);
}

std::string probe_svg(const ProbeReport& report) {
    std::vector<Series> series;
    for (const auto& r : report.rows) {
        const std::string label = "direction " + std::to_string(r.direction_id);
        auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.label == label; });
        if (it == series.end()) {
            series.push_back({label, {}});
            it = series.end() - 1;
        }
        it->points.emplace_back(r.h, r.ratio);
    }
    for (auto& s : series) std::sort(s.points.begin(), s.points.end());
    return svg_plot("second difference ratio of the value", "h", "q / (h^2 |d|^2)", series, true, false);
}

void emit_report(const SweepResult& result, const std::filesystem::path& stem) {
    write_text(std::filesystem::path(stem).concat(".csv"), sweep_csv(result));
    write_text(std::filesystem::path(stem).concat(".svg"), sweep_svg(result));
}

void emit_report(const ProbeReport& report, const std::filesystem::path& stem) {
    write_text(std::filesystem::path(stem).concat(".csv"), probe_csv(report));
    write_text(std::filesystem::path(stem).concat(".svg"), probe_svg(report));
}

}  // namespace gltransit
