#pragma once

// Independent check of constructed systems: the von Roos effective potential,
// a flux-form finite-difference discretization of
//   H = -d/dx (1/M) d/dx + V_eff
// with Dirichlet ends, and a symmetric tridiagonal eigensolver.

#include "pdmforge/field.hpp"
#include "pdmforge/grid.hpp"
#include "pdmforge/pct.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace pdm {

/// Kinetic-ordering ambiguity parameters with a + b + c = -1.
class VonRoosParams {
public:
    /// Throws DomainError unless a + b + c = -1 up to rounding of the sum.
    VonRoosParams(double a, double b, double c);

    static VonRoosParams ben_daniel_duke() { return {0.0, -1.0, 0.0}; }

    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double b() const noexcept { return b_; }
    [[nodiscard]] double c() const noexcept { return c_; }

private:
    double a_;
    double b_;
    double c_;
};

/// V + 1/2 (b+1) M''/M^2 - [a(a+b+1) + b + 1] M'^2/M^3.
double veff_from_vonroos(const SmoothMap1D& V, const MassProfile& mass, const VonRoosParams& p, double x);

/// Symmetric tridiagonal matrix. When built by discretize(), unknowns are
/// the interior grid points x_1..x_{N-2}.
class TridiagonalOperator {
public:
    /// off.size() must be diag.size() - 1; all entries finite.
    TridiagonalOperator(std::vector<double> diag, std::vector<double> off);

    [[nodiscard]] std::size_t size() const noexcept { return diag_.size(); }
    [[nodiscard]] const std::vector<double>& diag() const noexcept { return diag_; }
    [[nodiscard]] const std::vector<double>& off() const noexcept { return off_; }

    [[nodiscard]] std::vector<double> apply(std::span<const double> v) const;
    /// Max absolute row sum.
    [[nodiscard]] double norm_inf() const;
    /// Number of eigenvalues strictly below sigma (Sturm sequence / LDL^T inertia).
    [[nodiscard]] std::size_t count_below(double sigma) const;

private:
    std::vector<double> diag_;
    std::vector<double> off_;
};

/// Flux-form three-point scheme with a_{i+1/2} = 1/M(x_i + dx/2):
/// diag_i = (a_{i-1/2} + a_{i+1/2})/dx^2 + Veff_i, off_i = -a_{i+1/2}/dx^2.
/// veff holds one sample per grid point; the end samples are unused.
TridiagonalOperator discretize(const MassProfile& mass, std::span<const double> veff, const Grid1D& grid);

struct EigenOptions {
    double solver_tol = 1e-10;
    int max_sweeps = 50;
};

struct EigenSolution {
    std::vector<double> values;                // ascending
    std::vector<std::vector<double>> vectors;  // Euclidean unit norm over the unknowns
    std::vector<double> residuals;             // ||T v - lambda v||_2
};

/// k lowest eigenpairs by Sturm bisection and inverse iteration.
EigenSolution eigs_lowest(const TridiagonalOperator& T, std::size_t k, const EigenOptions& opts = {});

/// Pads an eigenvector with the Dirichlet zeros and rescales it to unit
/// trapezoid norm on the grid.
std::vector<double> to_grid_function(const Grid1D& grid, std::span<const double> interior);

struct VerifyOptions {
    EigenOptions solver;
    double boundary_tol = 1e-10;
    double energy_tol = 1e-3;
    double overlap_tol = 0.999;
};

struct LevelReport {
    int n = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double relative_gap = 0.0;
    double overlap = 0.0;
    /// Grid L2 norm of T psi - E psi over the interior points.
    double residual = 0.0;
    double solver_residual = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::vector<LevelReport> levels;
    bool all_pass = false;
};

/// Discretizes -d/dx (1/M) d/dx + V with V the constructed potential, solves
/// for k levels and compares against the analytic energies and states.
/// Throws BoundaryLeakError when an analytic state is not below boundary_tol
/// (relative to its maximum) at the window ends, DomainError when k is 0,
/// exceeds the constructed levels or N/4.
VerificationReport verify_system(const ConstructedSystem& sys, std::size_t k, const VerifyOptions& opts = {});

} // namespace pdm
