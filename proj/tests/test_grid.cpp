#include "gltransit/grid.hpp"

#include <doctest.h>
#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace gltransit;

namespace {

Field random_field(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field f(n);
    for (auto& v : f) v = u(rng);
    return f;
}

Eigen::MatrixXd dense_of(int M, Field (*op)(std::span<const double>, const SpaceTimeGrid&)) {
    const SpaceTimeGrid g(M, 1);
    const auto n = g.interior();
    Eigen::MatrixXd A(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        Field e(n);
        e[j] = 1.0;
        const Field col = op(e.span(), g);
        for (std::size_t i = 0; i < n; ++i) A(i, j) = col[i];
    }
    return A;
}

}  // namespace

TEST_CASE("grid geometry") {
    const SpaceTimeGrid g(4, 8, 2.0);
    CHECK(g.dx() == doctest::Approx(0.25));
    CHECK(g.dt() == doctest::Approx(0.25));
    CHECK(g.interior() == 3);
    CHECK(g.levels() == 9);
    CHECK(g.x(0) == doctest::Approx(0.25));
    CHECK(g.t(8) == doctest::Approx(2.0));
    CHECK_THROWS_AS(SpaceTimeGrid(1, 4), std::invalid_argument);
    CHECK_THROWS_AS(SpaceTimeGrid(4, 0), std::invalid_argument);
    CHECK_THROWS_AS(SpaceTimeGrid(4, 4, -1.0), std::invalid_argument);
}

TEST_CASE("norm_l2 examples") {
    CHECK(norm_l2(Field::zeros(SpaceTimeGrid(7, 1)).span(), SpaceTimeGrid(7, 1)) == 0.0);
    const Field ones{1, 1, 1};
    CHECK(norm_l2(ones.span(), SpaceTimeGrid(4, 1)) == doctest::Approx(std::sqrt(0.75)));
    const Field two{2};
    CHECK(norm_l2(two.span(), SpaceTimeGrid(2, 1)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("max_abs keeps NaN") {
    CHECK(max_abs(std::vector<double>{1.0, -3.0, 2.0}) == 3.0);
    CHECK(max_abs(std::vector<double>{}) == 0.0);
    CHECK(std::isnan(max_abs(std::vector<double>{1.0, std::nan(""), 2.0})));
    CHECK(std::isnan(max_abs(std::vector<double>{std::nan(""), 5.0})));
}

TEST_CASE("seminorm_h1 examples") {
    CHECK(seminorm_h1(Field(3).span(), SpaceTimeGrid(4, 1)) == 0.0);
    const Field one{1};
    CHECK(seminorm_h1(one.span(), SpaceTimeGrid(2, 1)) == doctest::Approx(2.0));
    const Field ones{1, 1, 1};
    CHECK(seminorm_h1(ones.span(), SpaceTimeGrid(4, 1)) == doctest::Approx(std::sqrt(8.0)));
}

TEST_CASE("d2_apply and b_apply examples") {
    const SpaceTimeGrid g(4, 1);
    const Field ones{1, 1, 1};
    CHECK(d2_apply(Field(3).span(), g) == Field(3));
    const Field d2 = d2_apply(ones.span(), g);
    CHECK(d2[0] == doctest::Approx(-16.0));
    CHECK(d2[1] == doctest::Approx(0.0));
    CHECK(d2[2] == doctest::Approx(-16.0));
    CHECK(b_apply(Field(3).span(), g) == Field(3));
    const Field b = b_apply(ones.span(), g);
    CHECK(b[0] == doctest::Approx(5.0 / 6.0));
    CHECK(b[1] == doctest::Approx(1.0));
    CHECK(b[2] == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("dimension mismatch is rejected") {
    const SpaceTimeGrid g(4, 2);
    CHECK_THROWS_AS(norm_l2(Field(2).span(), g), DimensionError);
    CHECK_THROWS_AS(d2_apply(Field(5).span(), g), DimensionError);
    CHECK_THROWS_AS(PathPair(4, 3).check(g), DimensionError);
    CHECK_NOTHROW(PathPair(g).check(g));
}

TEST_CASE("D2 is symmetric negative definite and matches the H1 seminorm") {
    std::mt19937_64 rng(7);
    for (int M : {2, 3, 5, 17, 64}) {
        const SpaceTimeGrid g(M, 1);
        const Eigen::MatrixXd A = dense_of(M, d2_apply);
        CHECK((A - A.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        CHECK(es.eigenvalues().maxCoeff() < 0.0);
        for (int trial = 0; trial < 5; ++trial) {
            const Field f = random_field(g.interior(), rng);
            const Field h = random_field(g.interior(), rng);
            const double fg = dot(d2_apply(f.span(), g).span(), h.span());
            const double gf = dot(f.span(), d2_apply(h.span(), g).span());
            CHECK(std::abs(fg - gf) <= 1e-12 * (std::abs(fg) + 1.0));
            const double quad = dot(d2_apply(f.span(), g).span(), f.span());
            CHECK(quad < 0.0);
            const double h1 = seminorm_h1(f.span(), g);
            CHECK(-g.dx() * quad == doctest::Approx(h1 * h1).epsilon(1e-12));
        }
    }
}

TEST_CASE("B is symmetric positive definite with spectrum in [1/3, 1]") {
    for (int M : {2, 3, 8, 33, 64}) {
        const Eigen::MatrixXd A = dense_of(M, b_apply);
        CHECK((A - A.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        CHECK(es.eigenvalues().minCoeff() >= 1.0 / 3.0 - 1e-14);
        CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-14);
    }
}

TEST_CASE("l2 norm identity and discrete Poincare bound") {
    std::mt19937_64 rng(11);
    for (int M : {2, 4, 9, 30, 64}) {
        const SpaceTimeGrid g(M, 1);
        for (int trial = 0; trial < 10; ++trial) {
            const Field f = random_field(g.interior(), rng);
            const double l2 = norm_l2(f.span(), g);
            CHECK(l2 * l2 == doctest::Approx(g.dx() * dot(f.span(), f.span())).epsilon(1e-14));
            CHECK(l2 <= seminorm_h1(f.span(), g));
        }
    }
}

TEST_CASE("transfer_path") {
    std::mt19937_64 rng(3);
    const SpaceTimeGrid coarse(4, 4);
    const SpaceTimeGrid fine(8, 8);
    PathPair p(coarse);
    for (auto& v : p.xi_all()) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    for (auto& v : p.eta_all()) v = std::uniform_real_distribution<double>(-1, 1)(rng);

    SUBCASE("identity on the same grid") { CHECK(transfer_path(p, coarse, coarse) == p); }

    SUBCASE("source nodes are preserved on a nested grid") {
        const PathPair q = transfer_path(p, coarse, fine);
        q.check(fine);
        for (std::size_t n = 0; n < coarse.levels(); ++n) {
            for (std::size_t i = 0; i < coarse.interior(); ++i) {
                CHECK(q.xi(2 * n)[2 * i + 1] == p.xi(n)[i]);
                CHECK(q.eta(2 * n)[2 * i + 1] == p.eta(n)[i]);
            }
        }
    }

    SUBCASE("interior constants are reproduced") {
        // Interior constants away from the Dirichlet ends: only nodes whose stencil stays inside.
        PathPair c(coarse);
        for (auto& v : c.xi_all()) v = 0.7;
        const SpaceTimeGrid to(4, 7, 1.0);
        const PathPair q = transfer_path(c, coarse, to);
        for (std::size_t n = 0; n < to.levels(); ++n) {
            for (std::size_t i = 0; i < to.interior(); ++i) CHECK(q.xi(n)[i] == doctest::Approx(0.7).epsilon(1e-15));
        }
    }

    SUBCASE("mismatched source is rejected") { CHECK_THROWS_AS(transfer_path(p, fine, coarse), DimensionError); }
}

TEST_CASE("transfer_field is exact for linear data") {
    Field f(9);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<double>(i + 1) / 10.0;
    // f(x) = x on M=10; values at 0 and 1 are zero by the Dirichlet convention, so only check interior nodes of M=5.
    const Field g = transfer_field(f.span(), 10, 5);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx((i + 1) / 5.0));
}
