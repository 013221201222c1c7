#pragma once

// Point-canonical-transformation engine for position-dependent-mass systems.
//
// A solvable triple (M, g, F) is turned into a potential and spectrum by
// evaluating, for each level n,
//
//   W_n(x) = E_n - V(x)
//          = (1/M) [ g'''/(2g') - 3/4 (g''/g')^2 - M''/(2M) + 3/4 (M'/M)^2 ]
//            + (g'^2/M) [ R_n(g) - 1/2 dQ/dg - 1/4 Q^2 ]
//
// and splitting W_n into an x-independent E_n and an n-independent V(x).
// The wavefunction is psi_n = f(x) F_n(g(x)) with f = (M/|g'|)^{1/2} exp(1/2 int Q).
//
// A generator dQ(g) then extends a constructed level by the moderating factor
// h = exp(1/2 int dQ dg), shifting the potential and energy by
//   dE - dV(x) = D(x).

#include "pdmforge/field.hpp"
#include "pdmforge/grid.hpp"
#include "pdmforge/specfam.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pdm {

/// A validated (M, g, F, grid) combination.
struct PctInputs {
    MassProfile mass;
    CoordinateMap coord;
    SpectralFamily family;
    Grid1D grid;
};

/// Throws DomainError when M or g do not cover the grid, or g maps the grid
/// outside the family's g-domain.
PctInputs make_pct_inputs(MassProfile mass, CoordinateMap coord, SpectralFamily family, Grid1D grid);

/// f(x) = (M/|g'|)^{1/2} exp(1/2 int_{g(x_ref)}^{g(x)} Q(y) dy). For
/// decreasing g this drops the constant phase of (M/g')^{1/2}.
/// Throws ConstructionError when M/|g'| is not positive and finite.
double build_f(const MassProfile& mass, const CoordinateMap& coord, const SpectralFamily& family,
               double x, double x_ref);

/// f'/f = 1/2 (M'/M - g''/g') + 1/2 Q(g) g'.
double log_deriv_f(const PctInputs& inp, double x);

/// W_n(x) together with the magnitude of the largest contributing term,
/// which bounds the rounding error of the value.
struct RhsTerms {
    double value = 0.0;
    double magnitude = 0.0;
};

RhsTerms rhs_solvable_terms(const PctInputs& inp, int n, double x);

/// W_n(x) = E_n - V(x) of the solvable branch.
double rhs_solvable(const PctInputs& inp, int n, double x);

/// W_n and term magnitudes for n = 0..n_max on every grid point.
struct LevelTable {
    std::vector<std::vector<double>> W;
    std::vector<std::vector<double>> magnitude;
};

LevelTable evaluate_levels(const PctInputs& inp, int n_max);

inline constexpr double kDefaultSplitTol = 1e-8;

struct EnergySplit {
    std::vector<double> V;
    std::vector<double> E;
    std::string gauge_note;
    /// max over n, x of |(W_n - W_0) - (E_n - E_0)| / max(1, term magnitude).
    double max_deviation = 0.0;
    /// Same without the rounding scale.
    double max_abs_deviation = 0.0;
};

/// Level-split deviation of a table against candidate energies, in the
/// rounding-scaled measure used by split_energy_potential.
double split_deviation(const LevelTable& table, const std::vector<double>& E, bool scaled = true);

/// With a rule: E_n from the rule and V = E_0 - W_0. Without: E_0 = 0,
/// V = -W_0, E_n = grid mean of W_n - W_0. Throws InconsistencyError when the
/// scaled deviation exceeds split_tol.
EnergySplit split_energy_potential(const LevelTable& table, const std::optional<EnergyRule>& rule,
                                   double split_tol = kDefaultSplitTol);

/// L2-normalized (trapezoid) samples of psi_n = f F_n(g) on the grid; the
/// first nonzero sample from the left is positive.
std::vector<double> assemble_psi(const PctInputs& inp, int n);

struct SystemProvenance {
    std::string kind;  // "laguerre_exponential", "harmonic_limit", "generic"
    double beta = 0.0;
    double nu = 0.0;
};

struct ConstructedSystem {
    PctInputs inputs;
    SystemProvenance provenance;
    std::vector<double> V;
    std::vector<double> E;
    std::vector<std::vector<double>> psi;
    std::string gauge_note;
    double split_deviation = 0.0;

    [[nodiscard]] const Grid1D& grid() const noexcept { return inputs.grid; }
    [[nodiscard]] int n_max() const noexcept { return static_cast<int>(E.size()) - 1; }
};

/// Generic pipeline: levels, split (using the family's energy rule if any), psi.
ConstructedSystem construct_system(const PctInputs& inp, int n_max,
                                   SystemProvenance provenance = {"generic"},
                                   double split_tol = kDefaultSplitTol);

/// Default window [-10/beta, 25/beta] with 8000 points.
Grid1D default_exponential_grid(double beta);

/// M = g = exp(-beta x) with the dressed Laguerre family of order nu and
/// E_n = beta^2 (n + (nu+1)/2). Requires beta > 0, nu > -1.
ConstructedSystem construct_laguerre_exponential(double beta, double nu, int n_max, const Grid1D& grid,
                                                 double split_tol = kDefaultSplitTol);

/// Closed-form potential beta^2/4 [(nu^2-1) e^{beta x} + e^{-beta x}] of the
/// exponential system.
double laguerre_exponential_potential(double beta, double nu, double x);

/// Default window [-8, 8] with 2000 points.
Grid1D default_harmonic_grid();

/// M = 1, g = x, dressed Hermite with E_n = 2n + 1.
ConstructedSystem construct_harmonic_limit(int n_max, const Grid1D& grid,
                                           double split_tol = kDefaultSplitTol);

/// A generator dQ(g) with analytic g-derivatives and an optional closed-form
/// energy shift for particular systems.
struct DeltaQ {
    using EnergyShiftRule = std::function<std::optional<double>(const ConstructedSystem&, int n)>;

    std::string label;
    SmoothMap1D q;  // function of g
    EnergyShiftRule energy_shift;
};

DeltaQ delta_q_zero();
DeltaQ delta_q_constant(double c);
/// dQ = 2/g; registers dE = beta^2 on the exponential system.
DeltaQ delta_q_two_over_g();
/// dQ = c g.
DeltaQ delta_q_linear(double c);

inline constexpr double kDefaultQuadTol = 1e-12;

/// h(x) = exp(1/2 int_{g(x_ref)}^{g(x)} dQ(y) dy), integrated in x after the
/// substitution y = g(t).
double h_from_deltaQ(const SmoothMap1D& dq, const CoordinateMap& coord, double x_ref, double x,
                     double tol = kDefaultQuadTol);

/// h as a smooth map: value by quadrature, derivatives by the chain rule on
/// h'/h = 1/2 dQ(g) g'.
SmoothMap1D moderating_map(const SmoothMap1D& dq, const CoordinateMap& coord, double x_ref,
                           double tol = kDefaultQuadTol);

/// ln h as a smooth map. Only derivatives of ln h enter D, so this form stays
/// finite where h itself overflows.
SmoothMap1D log_moderating_map(const SmoothMap1D& dq, const CoordinateMap& coord, double x_ref,
                               double tol = kDefaultQuadTol);

/// D(x) = dE - dV from h directly:
/// -(1/M) [h''/h + 2 (h'/h)(f'/f + g' F'/F - M'/(2M))].
double delta_rhs_eq13(const PctInputs& inp, int n, const SmoothMap1D& h, double x,
                      double node_guard = kDefaultNodeGuard);

/// delta_rhs_eq13 with h given as ln h.
double delta_rhs_eq13_log(const PctInputs& inp, int n, const SmoothMap1D& log_h, double x,
                          double node_guard = kDefaultNodeGuard);

/// D(x) = dE - dV from dQ with dR = -dQ F'/F:
/// -(1/(2M)) (g'' + 2 f' g'/f - M' g'/M) dQ - (g'^2/M) [F'/F dQ + 1/2 dQ_g + 1/4 dQ^2].
double delta_rhs_eq10(const PctInputs& inp, int n, const SmoothMap1D& dq, double x,
                      double node_guard = kDefaultNodeGuard);

struct PerturbOptions {
    /// Allow n >= 1; grid points near nodes of F_n are then left as NaN.
    bool override_node_guard = false;
    double node_guard = kDefaultNodeGuard;
    double quad_tol = kDefaultQuadTol;
    /// Tolerance for the pointwise check of closed forms against D.
    double check_tol = 1e-8;
};

struct PerturbationResult {
    std::string label;
    int level = 0;
    double deltaE = 0.0;
    /// True when deltaE = 0 is a gauge choice rather than a closed form.
    bool energy_gauge = true;
    std::vector<double> h;
    std::vector<double> D;
    std::vector<double> deltaV;
    std::vector<double> psi_ext;
    /// Grid points skipped for node proximity (override mode only).
    std::size_t masked_points = 0;
};

/// Extends level n of sys by the generator dq.
PerturbationResult apply_deltaQ(const ConstructedSystem& sys, int n, const DeltaQ& dq,
                                const PerturbOptions& opts = {});

/// Closed-form dQ = 2/g extension of the exponential system: dE = beta^2,
/// dV = beta^2 (nu+1) e^{beta x} + 2 beta^2 L_n'/L_n, h = g. The closed form
/// is checked pointwise against delta_rhs_eq10.
PerturbationResult deltaQ_2_over_g(const ConstructedSystem& sys, int n = 0,
                                   const PerturbOptions& opts = {});

} // namespace pdm
