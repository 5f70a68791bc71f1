#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gltransit {

/// Square band matrix with kl sub- and ku super-diagonals, stored row-major.
///
/// Each row keeps kl extra slots to the right so partial pivoting can factor in place.
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku);

    std::size_t rows() const noexcept { return n_; }
    std::size_t lower() const noexcept { return kl_; }
    std::size_t upper() const noexcept { return ku_; }

    bool in_band(std::size_t i, std::size_t j) const noexcept {
        return j + kl_ >= i && j <= i + ku_;
    }

    /// Element access; (i, j) must lie inside the band.
    double& at(std::size_t i, std::size_t j) noexcept { return data_[i * width_ + (j + kl_ - i)]; }
    const double& at(std::size_t i, std::size_t j) const noexcept { return data_[i * width_ + (j + kl_ - i)]; }

    /// Zero outside the band.
    double get(std::size_t i, std::size_t j) const noexcept { return in_band(i, j) ? at(i, j) : 0.0; }

    void add(std::size_t i, std::size_t j, double v) noexcept { at(i, j) += v; }

    void multiply(std::span<const double> x, std::span<double> y) const;

    /// Widest nonzero offset below and above the diagonal actually present.
    std::size_t measured_bandwidth() const;

private:
    friend class BandedLU;
    std::size_t n_ = 0;
    std::size_t kl_ = 0;
    std::size_t ku_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

/// LU factorization with partial (row) pivoting of a BandedMatrix.
class BandedLU {
public:
    /// Factors a copy of `a`. Throws SolverError when a zero pivot is met.
    explicit BandedLU(BandedMatrix a);

    void solve(std::span<double> rhs) const;

    /// Smallest |u_kk| over the factorization.
    double min_pivot() const noexcept { return min_pivot_; }

private:
    BandedMatrix lu_;
    std::vector<std::size_t> piv_;
    double min_pivot_ = 0.0;
};

}  // namespace gltransit
