#include "gltransit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gltransit {

SpaceTimeGrid::SpaceTimeGrid(int M, int N, double T) : M_(M), N_(N), T_(T) {
    if (M < 2) throw std::invalid_argument("grid needs M >= 2, got " + std::to_string(M));
    if (N < 1) throw std::invalid_argument("grid needs N >= 1, got " + std::to_string(N));
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("grid needs a finite horizon T > 0");
}

Field& Field::operator+=(const Field& o) {
    if (o.size() != size()) throw DimensionError("field size mismatch in +=");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    if (o.size() != size()) throw DimensionError("field size mismatch in -=");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
}

Field& Field::operator*=(double s) {
    for (auto& x : v_) x *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

PathPair::PathPair(const SpaceTimeGrid& g) : PathPair(g.levels(), g.interior()) {}

PathPair::PathPair(std::size_t levels, std::size_t width)
    : levels_(levels), width_(width), xi_(levels * width, 0.0), eta_(levels * width, 0.0) {}

Field PathPair::xi_field(std::size_t n) const {
    auto s = xi(n);
    return Field(std::vector<double>(s.begin(), s.end()));
}

Field PathPair::eta_field(std::size_t n) const {
    auto s = eta(n);
    return Field(std::vector<double>(s.begin(), s.end()));
}

void PathPair::set_xi(std::size_t n, const Field& f) {
    if (f.size() != width_) throw DimensionError("set_xi: field width mismatch");
    std::copy(f.begin(), f.end(), xi(n).begin());
}

void PathPair::set_eta(std::size_t n, const Field& f) {
    if (f.size() != width_) throw DimensionError("set_eta: field width mismatch");
    std::copy(f.begin(), f.end(), eta(n).begin());
}

void PathPair::check(const SpaceTimeGrid& g) const {
    if (levels_ != g.levels() || width_ != g.interior()) {
        throw DimensionError("path has " + std::to_string(levels_) + "x" + std::to_string(width_) +
                             " nodes, grid expects " + std::to_string(g.levels()) + "x" +
                             std::to_string(g.interior()));
    }
}

void check_field(std::span<const double> f, const SpaceTimeGrid& g, const char* what) {
    if (f.size() != g.interior()) {
        throw DimensionError(std::string(what) + " has " + std::to_string(f.size()) +
                             " nodes, grid expects " + std::to_string(g.interior()));
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_abs(std::span<const double> f) {
    double m = 0.0;
    for (double v : f) {
        if (std::isnan(v)) return v;
        m = std::max(m, std::abs(v));
    }
    return m;
}

double norm_l2(std::span<const double> f, const SpaceTimeGrid& g) {
    check_field(f, g);
    return std::sqrt(g.dx() * dot(f, f));
}

double seminorm_h1(std::span<const double> f, const SpaceTimeGrid& g) {
    check_field(f, g);
    const double dx = g.dx();
    double s = 0.0;
    double prev = 0.0;
    for (double v : f) {
        const double d = (v - prev) / dx;
        s += d * d;
        prev = v;
    }
    s += (prev / dx) * (prev / dx);
    return std::sqrt(dx * s);
}

void d2_apply(std::span<const double> f, double dx, std::span<double> out) {
    const std::size_t n = f.size();
    const double inv = 1.0 / (dx * dx);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? f[i - 1] : 0.0;
        const double right = i + 1 < n ? f[i + 1] : 0.0;
        out[i] = inv * (left - 2.0 * f[i] + right);
    }
}

Field d2_apply(std::span<const double> f, const SpaceTimeGrid& g) {
    check_field(f, g);
    Field out(f.size());
    d2_apply(f, g.dx(), out.span());
    return out;
}

Field b_apply(std::span<const double> f, const SpaceTimeGrid& g) {
    check_field(f, g);
    const std::size_t n = f.size();
    Field out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? f[i - 1] : 0.0;
        const double right = i + 1 < n ? f[i + 1] : 0.0;
        out[i] = (left + right) / 6.0 + 2.0 * f[i] / 3.0;
    }
    return out;
}

namespace {

// Bracketing index and weight for linear interpolation on k uniform cells of [0, 1].
struct Bracket {
    std::size_t lo;
    double w;  // weight of lo+1
};

Bracket bracket(double s, int cells) {
    const double pos = std::clamp(s, 0.0, 1.0) * cells;
    auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo >= static_cast<std::size_t>(cells)) lo = static_cast<std::size_t>(cells) - 1;
    double w = pos - static_cast<double>(lo);
    // Snap nodes that coincide up to rounding so nested grids transfer exactly.
    if (std::abs(w) < 1e-12) w = 0.0;
    if (std::abs(w - 1.0) < 1e-12) w = 1.0;
    return {lo, w};
}

// Value of a full (boundary-padded) row at spatial node index j of a grid with M cells.
double padded(std::span<const double> row, std::size_t j, int M) {
    if (j == 0 || j == static_cast<std::size_t>(M)) return 0.0;
    return row[j - 1];
}

double interp_space(std::span<const double> row, int from_M, double x) {
    const auto b = bracket(x, from_M);
    const double a = padded(row, b.lo, from_M);
    if (b.w == 0.0) return a;
    const double c = padded(row, b.lo + 1, from_M);
    if (b.w == 1.0) return c;
    return (1.0 - b.w) * a + b.w * c;
}

}  // namespace

Field transfer_field(std::span<const double> f, int from_M, int to_M) {
    if (f.size() != static_cast<std::size_t>(from_M - 1)) throw DimensionError("transfer_field: size mismatch");
    Field out(static_cast<std::size_t>(to_M - 1));
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = interp_space(f, from_M, static_cast<double>(i + 1) / to_M);
    }
    return out;
}

PathPair transfer_path(const PathPair& p, const SpaceTimeGrid& from, const SpaceTimeGrid& to) {
    p.check(from);
    if (from == to) return p;
    PathPair out(to);
    std::vector<double> tmp_xi(from.interior());
    std::vector<double> tmp_eta(from.interior());
    for (std::size_t n = 0; n < to.levels(); ++n) {
        const auto b = bracket(static_cast<double>(n) / to.N(), from.N());
        const std::size_t hi = std::min(b.lo + 1, static_cast<std::size_t>(from.N()));
        for (std::size_t i = 0; i < from.interior(); ++i) {
            if (b.w == 0.0) {
                tmp_xi[i] = p.xi(b.lo)[i];
                tmp_eta[i] = p.eta(b.lo)[i];
            } else if (b.w == 1.0) {
                tmp_xi[i] = p.xi(hi)[i];
                tmp_eta[i] = p.eta(hi)[i];
            } else {
                tmp_xi[i] = (1.0 - b.w) * p.xi(b.lo)[i] + b.w * p.xi(hi)[i];
                tmp_eta[i] = (1.0 - b.w) * p.eta(b.lo)[i] + b.w * p.eta(hi)[i];
            }
        }
        auto xi_row = out.xi(n);
        auto eta_row = out.eta(n);
        for (std::size_t i = 0; i < to.interior(); ++i) {
            const double x = to.x(i);
            xi_row[i] = interp_space(tmp_xi, from.M(), x);
            eta_row[i] = interp_space(tmp_eta, from.M(), x);
        }
    }
    return out;
}

}  // namespace gltransit
