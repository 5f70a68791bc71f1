#include "gltransit/model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gltransit;

TEST_CASE("potential examples") {
    const ModelParams p;
    CHECK(potential(1.0, 0, p) == 0.0);
    CHECK(potential(-1.0, 0, p) == 0.0);
    CHECK(potential(0.0, 0, p) == doctest::Approx(0.25));
    CHECK(potential(2.0, 1, p) == doctest::Approx(6.0));
    CHECK_THROWS_AS(potential(0.0, 4, p), std::invalid_argument);
}

TEST_CASE("potential symmetry and derivative consistency") {
    ModelParams raw;
    ModelParams cut;
    cut.cutoff_s = 1.5;
    for (const ModelParams* p : {&raw, &cut}) {
        for (double phi = -3.3; phi <= 3.3; phi += 0.37) {
            CHECK(potential(phi, 0, *p) == doctest::Approx(potential(-phi, 0, *p)));
            CHECK(potential(phi, 1, *p) == doctest::Approx(-potential(-phi, 1, *p)));
            CHECK(potential(phi, 2, *p) == doctest::Approx(potential(-phi, 2, *p)));
            const double h = 1e-5;
            for (int k = 0; k < 3; ++k) {
                const double fd = (potential(phi + h, k, *p) - potential(phi - h, k, *p)) / (2 * h);
                const double exact = potential(phi, k + 1, *p);
                CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
            }
        }
    }
}

TEST_CASE("cutoff keeps V inside [-s, s] and grows linearly beyond s + 1") {
    ModelParams p;
    p.cutoff_s = 2.0;
    const ModelParams raw;
    for (double phi = -2.0; phi <= 2.0; phi += 0.25) CHECK(potential(phi, 0, p) == potential(phi, 0, raw));
    CHECK(potential(3.5, 2, p) == 0.0);
    CHECK(potential(4.0, 1, p) == doctest::Approx(potential(5.0, 1, p)));
}

TEST_CASE("final and running cost") {
    ModelParams p;
    p.K = 1.0;
    const SpaceTimeGrid g2(2, 1);
    const Field two{2};
    const Field zero{0};
    CHECK(final_cost(two.span(), two.span(), p, g2) == 0.0);
    CHECK(final_cost(two.span(), zero.span(), p, g2) == doctest::Approx(2.0));
    CHECK(running_cost(zero.span(), g2) == 0.0);
    CHECK(running_cost(two.span(), g2) == doctest::Approx(1.0));

    // ||d||_l2 = 1e-4 with K = 1e9 gives 10.
    p.K = 1e9;
    const SpaceTimeGrid g4(4, 1);
    const Field d{1e-4, 1e-4, 1e-4};
    const Field z(3);
    const double l2 = norm_l2(d.span(), g4);
    Field scaled = (1e-4 / l2) * d;
    CHECK(final_cost(scaled.span(), z.span(), p, g4) == doctest::Approx(10.0));
}

TEST_CASE("hamiltonian") {
    ModelParams p;
    const SpaceTimeGrid g(2, 1);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 5; ++i) {
        const Field phi{std::uniform_real_distribution<double>(-2, 2)(rng)};
        CHECK(hamiltonian(Field{0.0}.span(), phi.span(), p, g) == 0.0);
    }
    for (double delta : {0.03, 1.0}) {
        p.delta = delta;
        // phi = 0 leaves only the quadratic term; phi = 1 adds delta dx (D2 phi, lambda) = -4 delta.
        CHECK(hamiltonian(Field{1.0}.span(), Field{0.0}.span(), p, g) == doctest::Approx(-0.25));
        CHECK(hamiltonian(Field{1.0}.span(), Field{1.0}.span(), p, g) == doctest::Approx(-4 * delta - 0.25));
    }
}

TEST_CASE("stable states") {
    ModelParams p;
    p.delta = 0.06;
    const SpaceTimeGrid g(200, 1);
    const StablePair sp = stable_states(p, g, 1e-12);
    CHECK(sp.residual <= 1e-12);
    CHECK(norm_l2(equilibrium_residual(sp.phi_plus.span(), p, g).span(), g) <= 1e-12);
    double mx = 0.0;
    for (std::size_t i = 0; i < sp.phi_plus.size(); ++i) {
        CHECK(sp.phi_plus[i] >= 0.0);
        CHECK(sp.phi_minus[i] == -sp.phi_plus[i]);
        mx = std::max(mx, sp.phi_plus[i]);
    }
    CHECK(mx > 0.99);
    CHECK(sp.phi_plus[0] < 0.5);
    CHECK(energy(sp.phi_plus.span(), p, g) < energy(Field(g.interior()).span(), p, g));

    SUBCASE("zero is an exact equilibrium but not the returned state") {
        CHECK(norm_l2(equilibrium_residual(Field(g.interior()).span(), p, g).span(), g) == 0.0);
    }

    SUBCASE("gradient-flow oracle") {
        const SpaceTimeGrid gc(40, 1);
        const StablePair spc = stable_states(p, gc, 1e-12);
        Field start(gc.interior(), 1.0);
        const Field flow = gradient_flow_equilibrium(start, p, gc, 1e-11);
        for (std::size_t i = 0; i < flow.size(); ++i) CHECK(std::abs(flow[i] - spc.phi_plus[i]) <= 1e-8);
    }

    SUBCASE("smaller delta") {
        ModelParams q;
        q.delta = 0.03;
        const SpaceTimeGrid gq(30, 1);
        const StablePair s = stable_states(q, gq);
        CHECK(s.residual <= 1e-12);
        CHECK(energy(s.phi_plus.span(), q, gq) < energy(Field(gq.interior()).span(), q, gq));
    }

    CHECK_THROWS_AS(stable_states(p, g, 0.0), std::invalid_argument);
}

TEST_CASE("action value and probability") {
    const ModelParams p;
    const SpaceTimeGrid g(5, 4);
    PathPair path(g);
    CHECK(action_value(path, p, g) == 0.0);
    std::mt19937_64 rng(9);
    for (auto& v : path.eta_all()) v = std::normal_distribution<double>()(rng);
    const double a = action_value(path, p, g);
    CHECK(a > 0.0);
    PathPair scaled = path;
    for (auto& v : scaled.eta_all()) v *= 3.0;
    CHECK(action_value(scaled, p, g) == doctest::Approx(9.0 * a));

    CHECK(transition_probability(0.0, 0.1) == 1.0);
    CHECK(transition_probability(0.5, 0.5) == doctest::Approx(std::exp(-1.0)));
    // exp(-8.551) = 1.93352e-4
    CHECK(transition_probability(8.551, 1.0) / 1.93352e-4 == doctest::Approx(1.0).epsilon(1e-5));
    CHECK_THROWS_AS(transition_probability(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("parameter validation") {
    ModelParams p;
    CHECK_NOTHROW(p.validate());
    p.delta = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.K = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.epsilon = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
