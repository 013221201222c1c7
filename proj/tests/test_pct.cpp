#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "pdmforge/errors.hpp"
#include "pdmforge/pct.hpp"

#include <cmath>

using namespace pdm;
using Catch::Approx;

namespace {

// Exponential Laguerre inputs (beta = 1, nu = 2) on a moderate window.
PctInputs exponential_inputs(double nu = 2.0, Grid1D grid = Grid1D(-4.0, 12.0, 801)) {
    const SmoothMap1D u = make_exp_map(-1.0, 0.0, grid.interval());
    return make_pct_inputs(MassProfile(u), CoordinateMap(u), dressed_laguerre_family(nu), grid);
}

PctInputs harmonic_inputs(Grid1D grid = Grid1D(-6.0, 6.0, 601)) {
    return make_pct_inputs(MassProfile(constant_map(1.0, grid.interval())),
                           CoordinateMap(identity_map(grid.interval())), dressed_hermite_family(), grid);
}

PctInputs broken_inputs() {
    const Grid1D grid(0.5, 8.0, 400);
    return make_pct_inputs(MassProfile(make_exp_map(-1.0, 0.0, grid.interval())),
                           CoordinateMap(identity_map(grid.interval())), dressed_laguerre_family(2.0), grid);
}

std::size_t index_of(const Grid1D& grid, double x) {
    return static_cast<std::size_t>(std::lround((x - grid.x_lo()) / grid.dx()));
}

} // namespace

TEST_CASE("build_f", "[pct]") {
    const Interval dom{0.5, 3.0};
    const SpectralFamily fam = dressed_laguerre_family(1.0);

    // M = lambda g' with g = 2x + 1, lambda = 3: f = sqrt(lambda) everywhere.
    const MassProfile lam_mass(constant_map(6.0, dom));
    const CoordinateMap lin(affine_map(2.0, 1.0, dom));
    for (double x : {0.6, 1.5, 2.9}) CHECK(build_f(lam_mass, lin, fam, x, 1.0) == Approx(std::sqrt(3.0)));

    const MassProfile unit(constant_map(1.0, dom));
    for (double x : {0.6, 1.5, 2.9}) {
        CHECK(build_f(unit, CoordinateMap(identity_map(dom)), fam, x, 1.0) == Approx(1.0));
        CHECK(build_f(unit, CoordinateMap(power_map(2.0, dom)), fam, x, 1.0) ==
              Approx(1.0 / std::sqrt(2.0 * x)).epsilon(1e-14));
    }

    // Decreasing g: M = e^{-x} = (-1) g' with g = e^{-x}; constant phase dropped.
    const SmoothMap1D u = make_exp_map(-1.0, 0.0, dom);
    CHECK(build_f(MassProfile(u), CoordinateMap(u), fam, 1.2, 1.0) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rhs_solvable examples", "[pct]") {
    const PctInputs exp_inp = exponential_inputs();
    CHECK(rhs_solvable(exp_inp, 0, 0.0) == Approx(0.5).epsilon(1e-14));
    CHECK(rhs_solvable(exp_inp, 1, 0.0) == Approx(1.5).epsilon(1e-14));

    const PctInputs ho = harmonic_inputs();
    for (int n = 0; n <= 3; ++n) {
        for (double x : {-2.5, 0.0, 1.3}) CHECK(rhs_solvable(ho, n, x) == Approx(2.0 * n + 1.0 - x * x).epsilon(1e-14));
    }
}

TEST_CASE("split_energy_potential", "[pct]") {
    SECTION("exponential system with its energy rule") {
        const auto rule = std::optional<EnergyRule>([](int n) { return n + 1.5; });
        const PctInputs inp = exponential_inputs();
        const EnergySplit s = split_energy_potential(evaluate_levels(inp, 3), rule);
        CHECK(s.E == std::vector<double>{1.5, 2.5, 3.5, 4.5});
        CHECK(s.V[index_of(inp.grid, 0.0)] == Approx(1.0).epsilon(1e-13));
        CHECK(s.max_deviation <= 1e-12);
    }
    SECTION("harmonic limit") {
        const PctInputs inp = harmonic_inputs();
        const auto rule = std::optional<EnergyRule>([](int n) { return 2.0 * n + 1.0; });
        const EnergySplit s = split_energy_potential(evaluate_levels(inp, 3), rule);
        for (std::size_t i = 0; i < inp.grid.size(); i += 37) {
            const double x = inp.grid.x(i);
            CHECK(s.V[i] == Approx(x * x).margin(1e-12));
        }
    }
    SECTION("gauge split without a rule") {
        const EnergySplit s = split_energy_potential(evaluate_levels(exponential_inputs(), 3), std::nullopt);
        CHECK(s.E[0] == 0.0);
        for (int n = 1; n <= 3; ++n) CHECK(s.E[n] == Approx(static_cast<double>(n)).epsilon(1e-12));
    }
    SECTION("broken triple is rejected") {
        try {
            (void)split_energy_potential(evaluate_levels(broken_inputs(), 2), std::nullopt);
            FAIL("expected InconsistencyError");
        } catch (const InconsistencyError& e) {
            CHECK(e.deviation() >= 1e-2);
        }
    }
}

TEST_CASE("assemble_psi", "[pct]") {
    const PctInputs inp = exponential_inputs();
    const auto psi0 = assemble_psi(inp, 0);
    CHECK(grid_norm(inp.grid, psi0) == Approx(1.0).epsilon(1e-12));
    // psi_0 / (e^{-g/2} g^{3/2}) is constant.
    std::vector<double> ratio;
    for (std::size_t i = 100; i < 700; i += 50) {
        const double g = std::exp(-inp.grid.x(i));
        ratio.push_back(psi0[i] / (std::exp(-0.5 * g) * std::pow(g, 1.5)));
    }
    for (double r : ratio) CHECK(r == Approx(ratio.front()).epsilon(1e-12));

    const auto psi1 = assemble_psi(inp, 1);
    int changes = 0;
    for (std::size_t i = 1; i < psi1.size(); ++i) {
        if (psi1[i] != 0.0 && psi1[i - 1] != 0.0 && (psi1[i] < 0.0) != (psi1[i - 1] < 0.0)) ++changes;
    }
    CHECK(changes == 1);
    const auto first = std::find_if(psi1.begin(), psi1.end(), [](double v) { return v != 0.0; });
    CHECK(*first > 0.0);

    const PctInputs ho = harmonic_inputs();
    const auto g0 = assemble_psi(ho, 0);
    const std::size_t mid = index_of(ho.grid, 0.0);
    for (std::size_t i = 0; i < ho.grid.size(); i += 40) {
        const double x = ho.grid.x(i);
        CHECK(g0[i] == Approx(g0[mid] * std::exp(-0.5 * x * x)).margin(1e-14));
    }
}

TEST_CASE("assemble_psi fails without support", "[pct]") {
    const Grid1D grid(-1.0, 1.0, 64);
    SpectralFamily::Parts parts{"null", {}, Interval::real_line(),
                                [](double) { return 0.0; },
                                [](double) { return 0.0; },
                                [](int, double) { return 0.0; },
                                [](int, double) { return 0.0; },
                                [](double) { return 0.0; },
                                [](double) { return 0.0; },
                                [](int, double) { return 0.0; },
                                true};
    const PctInputs inp = make_pct_inputs(MassProfile(constant_map(1.0, grid.interval())),
                                          CoordinateMap(identity_map(grid.interval())), SpectralFamily(parts), grid);
    CHECK_THROWS_AS(assemble_psi(inp, 0), DegenerateSupportError);
}

TEST_CASE("construct_laguerre_exponential", "[pct]") {
    const ConstructedSystem sys = construct_laguerre_exponential(1.0, 2.0, 3, Grid1D(-5.0, 15.0, 2001));
    CHECK(sys.E == std::vector<double>{1.5, 2.5, 3.5, 4.5});
    const std::size_t i0 = index_of(sys.grid(), 0.0);
    CHECK(sys.V[i0] == Approx(1.0).epsilon(1e-13));
    for (const auto& psi : sys.psi) CHECK(grid_norm(sys.grid(), psi) == Approx(1.0).epsilon(1e-8));

    CHECK(construct_laguerre_exponential(2.0, 1.0, 0, Grid1D(-3.0, 10.0, 500)).E[0] == 4.0);
    CHECK_THROWS_AS(construct_laguerre_exponential(-1.0, 2.0, 1, Grid1D(-3.0, 10.0, 500)), DomainError);
    CHECK_THROWS_AS(construct_laguerre_exponential(1.0, -1.5, 1, Grid1D(-3.0, 10.0, 500)), DomainError);
}

TEST_CASE("constructed states are orthogonal in plain L2", "[pct][property]") {
    const ConstructedSystem sys = construct_laguerre_exponential(1.0, 2.0, 3, default_exponential_grid(1.0));
    for (int m = 0; m <= 3; ++m) {
        for (int n = m + 1; n <= 3; ++n) CHECK(std::abs(grid_dot(sys.grid(), sys.psi[m], sys.psi[n])) <= 1e-6);
    }
}

TEST_CASE("level split is x-independent for registered triples", "[pct][property]") {
    for (double beta : {0.5, 1.0, 2.0}) {
        for (double nu : {1.0, 2.0, 3.0}) {
            const ConstructedSystem sys =
                construct_laguerre_exponential(beta, nu, 3, default_exponential_grid(beta));
            CHECK(sys.split_deviation <= kDefaultSplitTol);
        }
    }
    CHECK(construct_harmonic_limit(3, default_harmonic_grid()).split_deviation <= kDefaultSplitTol);
}

TEST_CASE("h_from_deltaQ", "[pct]") {
    const Interval dom{-3.0, 5.0};
    const CoordinateMap g(make_exp_map(-0.7, 0.2, dom));
    const double x_ref = 1.0;
    for (double x : {-2.5, 0.0, 1.0, 4.5}) {
        CHECK(h_from_deltaQ(delta_q_zero().q, g, x_ref, x) == 1.0);
        CHECK(h_from_deltaQ(delta_q_two_over_g().q, g, x_ref, x) == Approx(g(x) / g(x_ref)).epsilon(1e-10));
        const double c = 0.8;
        CHECK(h_from_deltaQ(delta_q_constant(c).q, g, x_ref, x) ==
              Approx(std::exp(0.5 * c * (g(x) - g(x_ref)))).epsilon(1e-10));
    }
    CHECK(h_from_deltaQ(delta_q_linear(0.3).q, g, x_ref, x_ref) == 1.0);
}

TEST_CASE("moderating_map derivatives agree with finite differences", "[pct][property]") {
    const Interval dom{-2.0, 2.0};
    const CoordinateMap g(make_exp_map(-1.0, 0.0, dom));
    const SmoothMap1D h = moderating_map(delta_q_linear(0.4).q, g, 0.0);
    for (double x : oracle::uniform_points(-1.5, 1.5, 10, 5)) {
        CHECK(fd_consistency(h, x, 1) <= 1e-5);
        CHECK(fd_consistency(h, x, 2) <= 1e-5);
        CHECK(h.eval(x) > 0.0);
    }
}

TEST_CASE("delta_rhs_eq13 examples", "[pct]") {
    const PctInputs exp_inp = exponential_inputs();
    const PctInputs ho = harmonic_inputs();
    const SmoothMap1D one = constant_map(1.0);
    for (double x : {-1.0, 0.0, 2.0}) {
        CHECK(delta_rhs_eq13(exp_inp, 0, one, x) == 0.0);
        // h = g gives D = 1 - 3 e^x.
        CHECK(delta_rhs_eq13(exp_inp, 0, exp_inp.coord.map(), x) == Approx(1.0 - 3.0 * std::exp(x)).epsilon(1e-13));
    }
    // Harmonic limit with h = e^{-eps x^2 / 2}, i.e. dQ = -2 eps g.
    const double eps = 0.3;
    const SmoothMap1D h = exp_of(-0.5 * eps * power_map(2.0, Interval::real_line()));
    for (double x : oracle::uniform_points(-4.0, 4.0, 25, 9)) {
        const double d13 = delta_rhs_eq13(ho, 0, h, x);
        const double d10 = delta_rhs_eq10(ho, 0, delta_q_linear(-2.0 * eps).q, x);
        CHECK(d13 == Approx(d10).epsilon(1e-12));
    }
}

TEST_CASE("delta_rhs_eq10 examples", "[pct]") {
    const PctInputs exp_inp = exponential_inputs();
    CHECK(delta_rhs_eq10(exp_inp, 0, delta_q_zero().q, 0.5) == 0.0);
    CHECK(delta_rhs_eq10(exp_inp, 0, delta_q_two_over_g().q, 0.0) == Approx(-2.0).epsilon(1e-14));

    // Harmonic limit, dQ = c g: D = c g^2 - c/2 - c^2 g^2 / 4 (hand reduction with F'/F = -g).
    const PctInputs ho = harmonic_inputs();
    const double c = 0.1;
    for (double x : oracle::uniform_points(-5.0, 5.0, 50, 21)) {
        const double ref = c * x * x - 0.5 * c - 0.25 * c * c * x * x;
        CHECK(delta_rhs_eq10(ho, 0, delta_q_linear(c).q, x) == Approx(ref).epsilon(1e-12).margin(1e-15));
    }
}

TEST_CASE("node proximity propagates from delta formulas", "[pct]") {
    const PctInputs inp = exponential_inputs();
    // L_1^2 vanishes at g = 3, i.e. x = -ln 3.
    CHECK_THROWS_AS(delta_rhs_eq10(inp, 1, delta_q_two_over_g().q, -std::log(3.0)), NodeProximityError);
}

TEST_CASE("apply_deltaQ", "[pct]") {
    const ConstructedSystem sys = construct_laguerre_exponential(1.0, 2.0, 1, Grid1D(-5.0, 20.0, 2501));

    SECTION("zero generator degenerates to the unperturbed system") {
        const PerturbationResult r = apply_deltaQ(sys, 0, delta_q_zero());
        CHECK(r.deltaE == 0.0);
        CHECK_FALSE(r.energy_gauge);
        for (std::size_t i = 0; i < r.h.size(); ++i) {
            CHECK(r.deltaV[i] == 0.0);
            CHECK(r.h[i] == 1.0);
            CHECK(r.psi_ext[i] == Approx(sys.psi[0][i]).margin(1e-15));
        }
    }
    SECTION("two_over_g gets its closed-form energy shift") {
        const PerturbationResult r = apply_deltaQ(sys, 0, delta_q_two_over_g());
        CHECK(r.deltaE == 1.0);
        for (std::size_t i = 0; i < r.h.size(); i += 97) {
            const double x = sys.grid().x(i);
            CHECK(r.deltaV[i] == Approx(3.0 * std::exp(x)).epsilon(1e-12));
            CHECK(r.h[i] == Approx(std::exp(-x) / std::exp(-sys.grid().midpoint())).epsilon(1e-9));
        }
    }
    SECTION("generic generator uses the zero-energy gauge") {
        const PerturbationResult r = apply_deltaQ(sys, 0, delta_q_constant(0.2));
        CHECK(r.energy_gauge);
        CHECK(r.deltaE == 0.0);
        for (std::size_t i = 0; i < r.D.size(); i += 50) CHECK(r.deltaV[i] == -r.D[i]);
    }
    SECTION("excited levels are refused without the override") {
        CHECK_THROWS_AS(apply_deltaQ(sys, 1, delta_q_two_over_g()), NodeProximityError);
        PerturbOptions opts;
        opts.override_node_guard = true;
        const PerturbationResult r = apply_deltaQ(sys, 1, delta_q_two_over_g(), opts);
        CHECK(r.deltaE == 1.0);
        CHECK(r.psi_ext.size() == sys.grid().size());
    }
    SECTION("levels beyond n_max are rejected") {
        CHECK_THROWS_AS(apply_deltaQ(sys, 2, delta_q_zero()), DomainError);
    }
}

TEST_CASE("deltaQ_2_over_g", "[pct]") {
    const Grid1D grid = default_exponential_grid(1.0);
    const ConstructedSystem sys = construct_laguerre_exponential(1.0, 2.0, 1, grid);
    const ConstructedSystem shifted = construct_laguerre_exponential(1.0, 4.0, 0, grid);
    const PerturbationResult r = deltaQ_2_over_g(sys);
    CHECK(r.deltaE == 1.0);
    CHECK(r.deltaV[index_of(grid, 0.0)] == Approx(3.0 * std::exp(grid.x(index_of(grid, 0.0)))).epsilon(1e-14));
    CHECK(sys.E[0] + r.deltaE == shifted.E[0]);
    CHECK(shifted.E[0] == 2.5);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = sys.V[i] + r.deltaV[i];
        CHECK(std::abs(v - shifted.V[i]) <= 1e-10 * std::max(std::abs(shifted.V[i]), shifted.E[0]));
        CHECK(std::abs(r.psi_ext[i] - shifted.psi[0][i]) <= 1e-10);
    }

    CHECK_THROWS_AS(deltaQ_2_over_g(sys, 1), NodeProximityError);
    const ConstructedSystem ho = construct_harmonic_limit(0, default_harmonic_grid());
    CHECK_THROWS_AS(deltaQ_2_over_g(ho), UsageError);
}

TEST_CASE("deltaQ_2_over_g on excited levels with the override", "[pct]") {
    const ConstructedSystem sys = construct_laguerre_exponential(1.0, 2.0, 2, Grid1D(-6.0, 20.0, 3000));
    PerturbOptions opts;
    opts.override_node_guard = true;
    const PerturbationResult r = deltaQ_2_over_g(sys, 2, opts);
    CHECK(r.deltaE == 1.0);
    const PerturbationResult generic = apply_deltaQ(sys, 2, delta_q_two_over_g(), opts);
    for (std::size_t i = 0; i < r.D.size(); i += 13) {
        if (std::isnan(r.D[i]) || std::isnan(generic.D[i])) continue;
        CHECK(r.deltaV[i] == Approx(generic.deltaV[i]).epsilon(1e-8).margin(1e-10));
    }
}

TEST_CASE("cross-formulation of the perturbation equations", "[pct][property]") {
    const ConstructedSystem exp_sys = construct_laguerre_exponential(1.0, 2.0, 0, default_exponential_grid(1.0));
    const ConstructedSystem ho_sys = construct_harmonic_limit(0, default_harmonic_grid());
    for (const ConstructedSystem* sys : {&exp_sys, &ho_sys}) {
        const PctInputs& inp = sys->inputs;
        const SmoothMap1D& g = inp.coord.map();
        const double g_ref = inp.coord(sys->grid().midpoint());
        const Interval dom = inp.coord.domain();
        // Closed-form ln h, independent of the quadrature route.
        const std::vector<std::pair<DeltaQ, SmoothMap1D>> cases = {
            {delta_q_zero(), constant_map(0.0, dom)},
            {delta_q_constant(0.3), 0.15 * g - constant_map(0.15 * g_ref)},
            {delta_q_linear(0.1), 0.025 * g * g - constant_map(0.025 * g_ref * g_ref)},
        };
        std::size_t compared = 0;
        for (const auto& [dq, log_h] : cases) {
            for (std::size_t i = 0; i < sys->grid().size(); i += 7) {
                const double x = sys->grid().x(i);
                const double d10 = delta_rhs_eq10(inp, 0, dq.q, x);
                const double d13 = delta_rhs_eq13_log(inp, 0, log_h, x);
                if (std::abs(d10) > 1e-12) {
                    CHECK(std::abs(d10 - d13) <= 1e-8 * std::abs(d10));
                    ++compared;
                }
            }
        }
        CHECK(compared > sys->grid().size() / 7);
    }
}

TEST_CASE("log-space and direct eq13 agree where h is finite", "[pct]") {
    const PctInputs inp = harmonic_inputs();
    const DeltaQ dq = delta_q_linear(0.2);
    const SmoothMap1D h = moderating_map(dq.q, inp.coord, 0.0);
    const SmoothMap1D log_h = log_moderating_map(dq.q, inp.coord, 0.0);
    for (double x : {-3.0, -0.5, 1.0, 2.5}) {
        CHECK(log_h.eval(x) == Approx(std::log(h.eval(x))).epsilon(1e-12));
        CHECK(delta_rhs_eq13_log(inp, 0, log_h, x) == Approx(delta_rhs_eq13(inp, 0, h, x)).epsilon(1e-12));
    }
}
