#include "pdmforge/vonroos.hpp"

#include "pdmforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

namespace pdm {

VonRoosParams::VonRoosParams(double a, double b, double c) : a_(a), b_(b), c_(c) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double sum = a + b + c;
    const double slack = 4.0 * eps * std::max(1.0, std::abs(a) + std::abs(b) + std::abs(c));
    if (!(std::abs(sum + 1.0) <= slack)) {
        std::ostringstream msg;
        msg << "VonRoosParams: a + b + c must equal -1, got " << sum;
        throw DomainError(msg.str());
    }
}

double veff_from_vonroos(const SmoothMap1D& V, const MassProfile& mass, const VonRoosParams& p, double x) {
    const Jet m = mass.jet(x);
    const double first = 0.5 * (p.b() + 1.0);
    const double second = p.a() * (p.a() + p.b() + 1.0) + p.b() + 1.0;
    double out = V.eval(x);
    if (first != 0.0) out += first * m.d2 / (m.v * m.v);
    if (second != 0.0) out -= second * m.d1 * m.d1 / (m.v * m.v * m.v);
    return out;
}

TridiagonalOperator::TridiagonalOperator(std::vector<double> diag, std::vector<double> off)
    : diag_(std::move(diag)), off_(std::move(off)) {
    if (diag_.empty() || off_.size() + 1 != diag_.size()) {
        throw DomainError("TridiagonalOperator: need n diagonal and n-1 off-diagonal entries");
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(diag_.begin(), diag_.end(), finite) || !std::all_of(off_.begin(), off_.end(), finite)) {
        throw DomainError("TridiagonalOperator: non-finite entry");
    }
}

std::vector<double> TridiagonalOperator::apply(std::span<const double> v) const {
    const std::size_t n = size();
    if (v.size() != n) throw DomainError("TridiagonalOperator::apply: size mismatch");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag_[i] * v[i];
        if (i > 0) s += off_[i - 1] * v[i - 1];
        if (i + 1 < n) s += off_[i] * v[i + 1];
        out[i] = s;
    }
    return out;
}

double TridiagonalOperator::norm_inf() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        double row = std::abs(diag_[i]);
        if (i > 0) row += std::abs(off_[i - 1]);
        if (i < off_.size()) row += std::abs(off_[i]);
        worst = std::max(worst, row);
    }
    return worst;
}

std::size_t TridiagonalOperator::count_below(double sigma) const {
    // Pivots of LDL^T of T - sigma I; the number of negative pivots is the
    // number of eigenvalues below sigma.
    constexpr double tiny = std::numeric_limits<double>::min();
    std::size_t count = 0;
    double q = diag_[0] - sigma;
    for (std::size_t i = 0;; ++i) {
        if (q == 0.0) q = -tiny;
        if (q < 0.0) ++count;
        if (i + 1 == size()) break;
        q = (diag_[i + 1] - sigma) - off_[i] * (off_[i] / q);
    }
    return count;
}

TridiagonalOperator discretize(const MassProfile& mass, std::span<const double> veff, const Grid1D& grid) {
    const std::size_t N = grid.size();
    if (veff.size() != N) throw DomainError("discretize: need one V_eff sample per grid point");
    if (!mass.domain().contains(grid.interval())) throw DomainError("discretize: mass does not cover the grid");
    const double dx = grid.dx();
    const double dx2 = dx * dx;
    // Inverse mass at the N-1 bond midpoints.
    std::vector<double> a(N - 1);
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const double m = mass(grid.x_lo() + (static_cast<double>(i) + 0.5) * dx);
        if (!(m > 0.0)) {
            std::ostringstream msg;
            msg << "discretize: non-positive mass " << m << " near x = " << grid.x(i);
            throw ConstructionError(msg.str());
        }
        a[i] = 1.0 / m;
    }
    const std::size_t unknowns = N - 2;
    std::vector<double> diag(unknowns);
    std::vector<double> off(unknowns - 1);
    for (std::size_t k = 0; k < unknowns; ++k) {
        diag[k] = (a[k] + a[k + 1]) / dx2 + veff[k + 1];
        if (k + 1 < unknowns) off[k] = -a[k + 1] / dx2;
    }
    return TridiagonalOperator(std::move(diag), std::move(off));
}

namespace {

// LU factorization of T - sigma I with partial pivoting; U has two
// superdiagonals.
class ShiftedLU {
public:
    ShiftedLU(const TridiagonalOperator& T, double sigma, double pivot_floor)
        : n_(T.size()), u0_(n_), u1_(n_, 0.0), u2_(n_, 0.0), l_(n_, 0.0), swapped_(n_, false) {
        const auto& d = T.diag();
        const auto& e = T.off();
        double cur_d = d[0] - sigma;
        double cur_u = n_ > 1 ? e[0] : 0.0;
        for (std::size_t i = 0; i + 1 < n_; ++i) {
            const double sub = e[i];
            const double next_d = d[i + 1] - sigma;
            const double next_u = i + 2 < n_ ? e[i + 1] : 0.0;
            if (std::abs(cur_d) >= std::abs(sub)) {
                if (cur_d == 0.0) cur_d = pivot_floor;
                l_[i] = sub / cur_d;
                u0_[i] = cur_d;
                u1_[i] = cur_u;
                cur_d = next_d - l_[i] * cur_u;
                cur_u = next_u;
            } else {
                swapped_[i] = true;
                l_[i] = cur_d / sub;
                u0_[i] = sub;
                u1_[i] = next_d;
                u2_[i] = next_u;
                cur_d = cur_u - l_[i] * next_d;
                cur_u = -l_[i] * next_u;
            }
        }
        u0_[n_ - 1] = cur_d == 0.0 ? pivot_floor : cur_d;
    }

    void solve(std::vector<double>& y) const {
        for (std::size_t i = 0; i + 1 < n_; ++i) {
            if (swapped_[i]) std::swap(y[i], y[i + 1]);
            y[i + 1] -= l_[i] * y[i];
        }
        for (std::size_t i = n_; i-- > 0;) {
            double s = y[i];
            if (i + 1 < n_) s -= u1_[i] * y[i + 1];
            if (i + 2 < n_) s -= u2_[i] * y[i + 2];
            y[i] = s / u0_[i];
        }
    }

private:
    std::size_t n_;
    std::vector<double> u0_, u1_, u2_, l_;
    std::vector<bool> swapped_;
};

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double residual_norm(const TridiagonalOperator& T, std::span<const double> v, double lambda) {
    std::vector<double> r = T.apply(v);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= lambda * v[i];
    return norm2(r);
}

double bisect_eigenvalue(const TridiagonalOperator& T, std::size_t j, double lo, double hi, double tol) {
    // Invariant: count_below(lo) <= j < count_below(hi).
    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= tol * std::max(1.0, std::abs(mid)) || mid == lo || mid == hi) break;
        if (T.count_below(mid) > j) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

EigenSolution eigs_lowest(const TridiagonalOperator& T, std::size_t k, const EigenOptions& opts) {
    const std::size_t n = T.size();
    if (k == 0 || k > n) throw DomainError("eigs_lowest: need 1 <= k <= matrix size");
    if (!(opts.solver_tol > 0.0) || opts.max_sweeps < 1) throw DomainError("eigs_lowest: bad options");

    // Gershgorin enclosure of the spectrum.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(T.off()[i - 1]);
        if (i + 1 < n) r += std::abs(T.off()[i]);
        lo = std::min(lo, T.diag()[i] - r);
        hi = std::max(hi, T.diag()[i] + r);
    }
    const double tnorm = T.norm_inf();
    const double spread = std::max(hi - lo, 1.0);
    lo -= 1e-12 * spread;
    hi += 1e-12 * spread;

    EigenSolution sol;
    sol.values.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        // Each eigenvalue is at least the previous one.
        const double start = j == 0 ? lo : sol.values[j - 1] - opts.solver_tol * std::max(1.0, std::abs(sol.values[j - 1]));
        sol.values.push_back(bisect_eigenvalue(T, j, std::max(lo, start), hi, opts.solver_tol));
    }

    const double pivot_floor = std::numeric_limits<double>::epsilon() * std::max(tnorm, 1.0);
    for (std::size_t j = 0; j < k; ++j) {
        const double lambda = sol.values[j];
        const ShiftedLU lu(T, lambda, pivot_floor);
        // Deterministic, generic start vector.
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3 * j);
        double vn = norm2(v);
        for (double& x : v) x /= vn;

        bool converged = false;
        double res = 0.0;
        for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
            std::vector<double> y = v;
            lu.solve(y);
            for (std::size_t p = 0; p < j; ++p) {
                const double c = dot(y, sol.vectors[p]);
                for (std::size_t i = 0; i < n; ++i) y[i] -= c * sol.vectors[p][i];
            }
            const double yn = norm2(y);
            if (!(yn > 0.0) || !std::isfinite(yn)) break;
            for (double& x : y) x /= yn;
            if (dot(y, v) < 0.0) {
                for (double& x : y) x = -x;
            }
            v = std::move(y);
            res = residual_norm(T, v, lambda);
            // Iterate-to-iterate change is not used: near-singular solves leave
            // O(eps ||T|| / gap) noise in v, far above any fixed threshold for
            // large N, while the residual stays meaningful.
            if (sweep >= 1 && res <= opts.solver_tol * std::max(tnorm, 1.0)) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            std::ostringstream msg;
            msg << "eigs_lowest: inverse iteration for level " << j << " did not converge in "
                << opts.max_sweeps << " sweeps";
            throw SolverError(msg.str(), static_cast<int>(j));
        }
        // Rayleigh quotient sharpens the bisection estimate to O(res^2).
        const std::vector<double> tv = T.apply(v);
        sol.values[j] = dot(v, tv);
        res = residual_norm(T, v, sol.values[j]);
        // Sign convention: first entry of significant size positive.
        const auto first = std::find_if(v.begin(), v.end(), [](double x) { return std::abs(x) > 1e-12; });
        if (first != v.end() && *first < 0.0) {
            for (double& x : v) x = -x;
        }
        sol.vectors.push_back(std::move(v));
        sol.residuals.push_back(res);
    }
    return sol;
}

std::vector<double> to_grid_function(const Grid1D& grid, std::span<const double> interior) {
    if (interior.size() + 2 != grid.size()) throw DomainError("to_grid_function: size mismatch");
    std::vector<double> out(grid.size(), 0.0);
    const double s = 1.0 / std::sqrt(grid.dx());
    for (std::size_t i = 0; i < interior.size(); ++i) out[i + 1] = interior[i] * s;
    return out;
}

VerificationReport verify_system(const ConstructedSystem& sys, std::size_t k, const VerifyOptions& opts) {
    const Grid1D& grid = sys.grid();
    const std::size_t N = grid.size();
    if (k == 0) throw DomainError("verify_system: k must be at least 1");
    if (k > sys.E.size()) throw DomainError("verify_system: k exceeds the constructed levels");
    if (k > N / 4) throw DomainError("verify_system: k exceeds N/4; grid too coarse");

    for (std::size_t n = 0; n < k; ++n) {
        const auto& psi = sys.psi[n];
        double peak = 0.0;
        for (double v : psi) peak = std::max(peak, std::abs(v));
        const double leak = std::max(std::abs(psi.front()), std::abs(psi.back())) / peak;
        if (!(leak <= opts.boundary_tol)) {
            std::ostringstream msg;
            msg << "verify_system: level " << n << " leaks at the window boundary (" << leak << " > "
                << opts.boundary_tol << "); widen the grid";
            throw BoundaryLeakError(msg.str(), static_cast<int>(n), leak);
        }
    }

    const TridiagonalOperator T = discretize(sys.inputs.mass, sys.V, grid);
    const EigenSolution sol = eigs_lowest(T, k, opts.solver);

    VerificationReport report;
    report.all_pass = true;
    for (std::size_t n = 0; n < k; ++n) {
        const auto& psi = sys.psi[n];
        LevelReport lvl;
        lvl.n = static_cast<int>(n);
        lvl.analytic = sys.E[n];
        lvl.numeric = sol.values[n];
        lvl.relative_gap = std::abs(lvl.numeric - lvl.analytic) / std::max(std::abs(lvl.analytic), 1e-300);
        lvl.overlap = std::abs(grid_dot(grid, psi, to_grid_function(grid, sol.vectors[n])));
        const std::vector<double> inner(psi.begin() + 1, psi.end() - 1);
        std::vector<double> r = T.apply(inner);
        double sum = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double ri = r[i] - lvl.analytic * inner[i];
            sum += ri * ri;
        }
        lvl.residual = std::sqrt(sum * grid.dx());
        lvl.solver_residual = sol.residuals[n];
        lvl.pass = lvl.relative_gap <= opts.energy_tol && lvl.overlap >= opts.overlap_tol;
        report.all_pass = report.all_pass && lvl.pass;
        report.levels.push_back(lvl);
    }
    return report;
}

} // namespace pdm
