#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "pdmforge/errors.hpp"
#include "pdmforge/field.hpp"

#include <cmath>
#include <numbers>

using namespace pdm;
using Catch::Approx;

TEST_CASE("make_exp_map derivative chain", "[field]") {
    const SmoothMap1D one = make_exp_map(0.0, 0.0);
    CHECK(one.eval(5.0) == 1.0);
    CHECK(one.d1(5.0) == 0.0);

    const SmoothMap1D decay = make_exp_map(-1.0, 0.0);
    CHECK(decay.eval(0.0) == 1.0);
    CHECK(decay.d1(0.0) == -1.0);
    CHECK(decay.d2(0.0) == 1.0);

    const SmoothMap1D grow = make_exp_map(2.0, 0.0);
    CHECK(grow.eval(1.0) == Approx(7.38905609893065).epsilon(1e-14));
    CHECK(grow.d3(1.0) == Approx(59.1124487914452).epsilon(1e-14));
    // Oracle: finite differences of eval.
    CHECK(grow.d1(1.0) == Approx(oracle::fd1([&](double x) { return grow.eval(x); }, 1.0)).epsilon(1e-8));
}

TEST_CASE("integrate known antiderivatives", "[field][quadrature]") {
    const double tol = 1e-10;
    CHECK(integrate(identity_map(), 0.0, 1.0, tol) == Approx(0.5).margin(tol));
    const SmoothMap1D sine{Interval::real_line(), [](double x) {
                               return Jet{std::sin(x), std::cos(x), -std::sin(x), -std::cos(x)};
                           }};
    CHECK(integrate(sine, 0.0, std::numbers::pi, tol) == Approx(2.0).margin(tol));
    const SmoothMap1D inv = reciprocal(identity_map({0.5, 4.0}));
    CHECK(integrate(inv, 1.0, 2.0, tol) == Approx(std::log(2.0)).margin(tol));
}

TEST_CASE("integrate is antisymmetric and additive", "[field][quadrature][property]") {
    const double tol = 1e-10;
    const SmoothMap1D u = make_exp_map(0.7, -0.2) * polynomial_map({1.0, -2.0, 0.5});
    for (double c : oracle::uniform_points(-3.0, 3.0, 20, 7)) {
        const double a = -1.3;
        const double b = 0.4;
        CHECK(integrate(u, a, b, tol) == Approx(-integrate(u, b, a, tol)).margin(1e-15));
        const double split = integrate(u, a, b, tol) + integrate(u, b, c, tol);
        // Adaptive Simpson controls the error to within a small multiple of tol.
        CHECK(std::abs(split - integrate(u, a, c, tol)) <= 10.0 * tol);
    }
}

TEST_CASE("integrate reports non-convergence with the best estimate", "[field][quadrature]") {
    const auto f = [](double x) { return std::sin(1.0 / (x + 1e-3)); };
    try {
        (void)integrate(f, 0.0, 1.0, QuadratureOptions{1e-14, 6});
        FAIL("expected QuadratureError");
    } catch (const QuadratureError& e) {
        CHECK(std::isfinite(e.best_estimate()));
    }
    CHECK_THROWS_AS(integrate([](double x) { return 1.0 / x; }, 0.0, 1.0), QuadratureError);
}

TEST_CASE("fd_consistency examples", "[field]") {
    CHECK(fd_consistency(constant_map(3.0), 1.7, 1) == 0.0);
    CHECK(fd_consistency(make_exp_map(-1.0, 0.0), 0.0, 2) <= 1e-6);
    CHECK(fd_consistency(power_map(3.0, Interval::real_line()), 1.0, 3) <= 1e-4);
    CHECK_THROWS_AS(fd_consistency(identity_map(), 0.0, 4), DomainError);
}

TEST_CASE("analytic constructors agree with finite differences", "[field][property]") {
    const Interval dom{0.2, 3.0};
    const std::vector<SmoothMap1D> maps = {
        make_exp_map(-1.3, 0.4, dom),
        power_map(2.5, dom),
        affine_map(2.0, -1.0, dom) * make_exp_map(0.5, 0.0, dom),
        compose(make_exp_map(1.0, 0.0), polynomial_map({0.0, 0.3, -0.1}, dom)),
        reciprocal(polynomial_map({1.0, 0.0, 1.0}, dom)),
        exp_of(-0.5 * power_map(2.0, dom)),
        make_exp_map(0.4, 0.0, dom) - power_map(-1.0, dom),
    };
    const auto xs = oracle::uniform_points(0.4, 2.8, 100, 11);
    for (const SmoothMap1D& u : maps) {
        for (double x : xs) {
            CHECK(fd_consistency(u, x, 1) <= 1e-5);
            CHECK(fd_consistency(u, x, 2) <= 1e-5);
            CHECK(fd_consistency(u, x, 3) <= 1e-3);
            CHECK(std::isfinite(u.eval(x)));
        }
    }
}

TEST_CASE("domains are explicit and enforced", "[field]") {
    const SmoothMap1D u = identity_map({0.0, 1.0});
    CHECK_THROWS_AS(u.eval(1.5), DomainError);
    CHECK_THROWS_AS(u + identity_map({2.0, 3.0}), DomainError);
    CHECK((u * identity_map({0.5, 2.0})).domain().lo == 0.5);
    CHECK_THROWS_AS(integrate(u, 0.0, 2.0, 1e-8), DomainError);
    CHECK_THROWS_AS(power_map(0.5, Interval::real_line()), DomainError);
}

TEST_CASE("MassProfile rejects non-positive masses", "[field]") {
    CHECK_NOTHROW(MassProfile(make_exp_map(-1.0, 0.0, {-5.0, 5.0})));
    CHECK_THROWS_AS(MassProfile(affine_map(1.0, 0.0, {-1.0, 1.0})), ConstructionError);
    CHECK_THROWS_AS(MassProfile(polynomial_map({0.01, 0.0, -1.0}, {-1.0, 1.0})), ConstructionError);
    CHECK_THROWS_AS(MassProfile(constant_map(1.0)), ConstructionError);
}

TEST_CASE("CoordinateMap requires strict monotonicity", "[field]") {
    CHECK_NOTHROW(CoordinateMap(make_exp_map(-1.0, 0.0, {-5.0, 5.0})));
    CHECK_THROWS_AS(CoordinateMap(polynomial_map({0.0, 0.0, 1.0}, {-1.0, 1.0})), ConstructionError);
    CHECK_THROWS_AS(CoordinateMap(constant_map(2.0, {0.0, 1.0})), ConstructionError);
}
