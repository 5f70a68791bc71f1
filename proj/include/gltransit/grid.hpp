#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gltransit {

/// Thrown when a field or path does not match the grid it is used with.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Uniform space-time grid on [0,1] x [0,T]: M spatial subintervals, N time steps.
class SpaceTimeGrid {
public:
    SpaceTimeGrid(int M, int N, double T = 1.0);

    int M() const noexcept { return M_; }
    int N() const noexcept { return N_; }
    double T() const noexcept { return T_; }

    double dx() const noexcept { return 1.0 / M_; }
    double dt() const noexcept { return T_ / N_; }

    /// Number of interior nodes, M-1.
    std::size_t interior() const noexcept { return static_cast<std::size_t>(M_ - 1); }
    std::size_t levels() const noexcept { return static_cast<std::size_t>(N_ + 1); }

    double x(std::size_t i) const noexcept { return static_cast<double>(i + 1) / M_; }
    double t(std::size_t n) const noexcept { return T_ * static_cast<double>(n) / N_; }

    bool operator==(const SpaceTimeGrid&) const = default;

private:
    int M_;
    int N_;
    double T_;
};

/// Interior nodal values of a function on (0,1); the Dirichlet zeros at x=0,1 are implicit.
class Field {
public:
    Field() = default;
    explicit Field(std::size_t n, double value = 0.0) : v_(n, value) {}
    explicit Field(std::vector<double> values) : v_(std::move(values)) {}
    Field(std::initializer_list<double> values) : v_(values) {}

    static Field zeros(const SpaceTimeGrid& g) { return Field(g.interior()); }

    std::size_t size() const noexcept { return v_.size(); }
    double& operator[](std::size_t i) noexcept { return v_[i]; }
    double operator[](std::size_t i) const noexcept { return v_[i]; }

    std::span<double> span() noexcept { return v_; }
    std::span<const double> span() const noexcept { return v_; }
    const std::vector<double>& values() const noexcept { return v_; }

    auto begin() noexcept { return v_.begin(); }
    auto end() noexcept { return v_.end(); }
    auto begin() const noexcept { return v_.begin(); }
    auto end() const noexcept { return v_.end(); }

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);

    bool operator==(const Field&) const = default;

private:
    std::vector<double> v_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// State trajectory xi^0..xi^N and dual trajectory eta^0..eta^N, stored level-major.
class PathPair {
public:
    PathPair() = default;
    explicit PathPair(const SpaceTimeGrid& g);
    PathPair(std::size_t levels, std::size_t width);

    std::size_t levels() const noexcept { return levels_; }
    std::size_t width() const noexcept { return width_; }

    std::span<double> xi(std::size_t n) noexcept { return {xi_.data() + n * width_, width_}; }
    std::span<const double> xi(std::size_t n) const noexcept { return {xi_.data() + n * width_, width_}; }
    std::span<double> eta(std::size_t n) noexcept { return {eta_.data() + n * width_, width_}; }
    std::span<const double> eta(std::size_t n) const noexcept { return {eta_.data() + n * width_, width_}; }

    Field xi_field(std::size_t n) const;
    Field eta_field(std::size_t n) const;
    void set_xi(std::size_t n, const Field& f);
    void set_eta(std::size_t n, const Field& f);

    std::span<const double> xi_all() const noexcept { return xi_; }
    std::span<const double> eta_all() const noexcept { return eta_; }
    std::span<double> xi_all() noexcept { return xi_; }
    std::span<double> eta_all() noexcept { return eta_; }

    /// Throws DimensionError unless the path has N+1 levels of M-1 nodes.
    void check(const SpaceTimeGrid& g) const;

    bool operator==(const PathPair&) const = default;

private:
    std::size_t levels_ = 0;
    std::size_t width_ = 0;
    std::vector<double> xi_;
    std::vector<double> eta_;
};

void check_field(std::span<const double> f, const SpaceTimeGrid& g, const char* what = "field");

double dot(std::span<const double> a, std::span<const double> b);

/// Largest |f_i|, or NaN when any entry is NaN (std::max would drop it).
double max_abs(std::span<const double> f);

/// Discrete L2 norm sqrt(dx * sum f_i^2).
double norm_l2(std::span<const double> f, const SpaceTimeGrid& g);

/// Discrete H1 seminorm from forward differences, including both boundary slopes.
double seminorm_h1(std::span<const double> f, const SpaceTimeGrid& g);

/// Second difference quotient with homogeneous Dirichlet data.
Field d2_apply(std::span<const double> f, const SpaceTimeGrid& g);
void d2_apply(std::span<const double> f, double dx, std::span<double> out);

/// Piecewise-linear mass matrix product, stencil (1/6, 2/3, 1/6).
Field b_apply(std::span<const double> f, const SpaceTimeGrid& g);

/// Bilinear interpolation of a path from one grid onto another.
PathPair transfer_path(const PathPair& p, const SpaceTimeGrid& from, const SpaceTimeGrid& to);

/// Linear interpolation of a single field (boundary zeros included) onto another spatial grid.
Field transfer_field(std::span<const double> f, int from_M, int to_M);

}  // namespace gltransit
