#include "gltransit/banded.hpp"

#include "gltransit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gltransit {

BandedMatrix::BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), width_(2 * kl + ku + 1), data_(n * (2 * kl + ku + 1), 0.0) {}

void BandedMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t lo = i > kl_ ? i - kl_ : 0;
        const std::size_t hi = std::min(n_ - 1, i + ku_);
        double s = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) s += at(i, j) * x[j];
        y[i] = s;
    }
}

std::size_t BandedMatrix::measured_bandwidth() const {
    std::size_t bw = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t lo = i > kl_ ? i - kl_ : 0;
        const std::size_t hi = std::min(n_ - 1, i + ku_);
        for (std::size_t j = lo; j <= hi; ++j) {
            if (at(i, j) != 0.0) bw = std::max(bw, i > j ? i - j : j - i);
        }
    }
    return bw;
}

BandedLU::BandedLU(BandedMatrix a) : lu_(std::move(a)), piv_(lu_.n_) {
    const std::size_t n = lu_.n_;
    const std::size_t kl = lu_.kl_;
    const std::size_t reach = lu_.ku_ + kl;  // upper bandwidth of U after pivoting
    min_pivot_ = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t last_row = std::min(n - 1, k + kl);
        const std::size_t last_col = std::min(n - 1, k + reach);
        std::size_t p = k;
        double best = std::abs(lu_.at(k, k));
        for (std::size_t i = k + 1; i <= last_row; ++i) {
            const double v = std::abs(lu_.at(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        piv_[k] = p;
        if (best == 0.0 || !std::isfinite(best)) {
            throw SolverError("banded LU: singular pivot in column " + std::to_string(k), 0.0);
        }
        min_pivot_ = std::min(min_pivot_, best);
        if (p != k) {
            double* rk = &lu_.at(k, k);
            double* rp = &lu_.at(p, k);
            std::swap_ranges(rk, rk + (last_col - k + 1), rp);
        }
        const double* rowk = &lu_.at(k, k);
        const double inv = 1.0 / rowk[0];
        const std::size_t len = last_col - k;
        for (std::size_t i = k + 1; i <= last_row; ++i) {
            double* rowi = &lu_.at(i, k);
            const double l = rowi[0] * inv;
            rowi[0] = l;
            if (l == 0.0) continue;
            for (std::size_t j = 1; j <= len; ++j) rowi[j] -= l * rowk[j];
        }
    }
}

void BandedLU::solve(std::span<double> b) const {
    const std::size_t n = lu_.n_;
    const std::size_t kl = lu_.kl_;
    const std::size_t reach = lu_.ku_ + kl;
    for (std::size_t k = 0; k < n; ++k) {
        if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
        const double bk = b[k];
        if (bk == 0.0) continue;
        const std::size_t last_row = std::min(n - 1, k + kl);
        for (std::size_t i = k + 1; i <= last_row; ++i) b[i] -= lu_.at(i, k) * bk;
    }
    for (std::size_t i = n; i-- > 0;) {
        const std::size_t last_col = std::min(n - 1, i + reach);
        const double* row = &lu_.at(i, i);
        double s = b[i];
        for (std::size_t j = 1; j <= last_col - i; ++j) s -= row[j] * b[i + j];
        b[i] = s / row[0];
    }
}

}  // namespace gltransit
