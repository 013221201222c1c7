#pragma once

// Smooth one-dimensional maps carrying an exact derivative chain up to third
// order, plus quadrature and finite-difference checks on them.

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace pdm {

/// Closed interval [lo, hi]. Either end may be infinite.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    [[nodiscard]] bool contains(double x) const noexcept { return x >= lo && x <= hi; }
    [[nodiscard]] bool contains(const Interval& other) const noexcept {
        return other.lo >= lo && other.hi <= hi;
    }
    [[nodiscard]] bool interior(double x) const noexcept { return x > lo && x < hi; }
    [[nodiscard]] bool bounded() const noexcept;
    [[nodiscard]] bool empty() const noexcept { return !(lo <= hi); }

    static Interval real_line() { return {}; }
    static Interval positive() { return {0.0, std::numeric_limits<double>::infinity()}; }
};

/// Intersection of two intervals; throws DomainError when it is empty.
Interval intersect(const Interval& a, const Interval& b);

/// Value and first three derivatives at a point.
struct Jet {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

/// A real function of one real variable with analytic derivatives to order 3.
///
/// Immutable; copies share the underlying callable.
class SmoothMap1D {
public:
    using JetFn = std::function<Jet(double)>;

    SmoothMap1D(Interval domain, JetFn fn);

    [[nodiscard]] const Interval& domain() const noexcept { return domain_; }

    /// Full jet at x. Throws DomainError outside the domain.
    [[nodiscard]] Jet jet(double x) const;

    [[nodiscard]] double eval(double x) const { return jet(x).v; }
    [[nodiscard]] double d1(double x) const { return jet(x).d1; }
    [[nodiscard]] double d2(double x) const { return jet(x).d2; }
    [[nodiscard]] double d3(double x) const { return jet(x).d3; }

    [[nodiscard]] double operator()(double x) const { return eval(x); }

    /// Same map on a sub-interval of the current domain.
    [[nodiscard]] SmoothMap1D restricted(const Interval& sub) const;

private:
    Interval domain_;
    std::shared_ptr<const JetFn> fn_;
};

// Analytic constructors.
SmoothMap1D constant_map(double c, Interval domain = Interval::real_line());
SmoothMap1D identity_map(Interval domain = Interval::real_line());
SmoothMap1D affine_map(double slope, double offset, Interval domain = Interval::real_line());
/// u(x) = exp(a*x + b).
SmoothMap1D make_exp_map(double a, double b, Interval domain = Interval::real_line());
/// u(x) = x^p. Non-integer p requires a domain inside (0, inf).
SmoothMap1D power_map(double p, Interval domain = Interval::positive());
/// u(x) = sum_k coeffs[k] x^k.
SmoothMap1D polynomial_map(std::vector<double> coeffs, Interval domain = Interval::real_line());

// Combinators. Domains are intersected; an empty intersection throws.
SmoothMap1D operator+(const SmoothMap1D& u, const SmoothMap1D& v);
SmoothMap1D operator-(const SmoothMap1D& u, const SmoothMap1D& v);
SmoothMap1D operator*(const SmoothMap1D& u, const SmoothMap1D& v);
SmoothMap1D operator*(double s, const SmoothMap1D& u);
/// x -> outer(inner(x)); the result's domain is the inner domain restricted to
/// points mapped into the outer domain (checked lazily at evaluation).
SmoothMap1D compose(const SmoothMap1D& outer, const SmoothMap1D& inner);
SmoothMap1D reciprocal(const SmoothMap1D& u);
SmoothMap1D exp_of(const SmoothMap1D& u);

/// Dimensionless mass M(x) > 0 on a bounded domain.
class MassProfile {
public:
    static constexpr int kScanPoints = 1024;

    /// Throws ConstructionError when the domain is unbounded or a 1024-point
    /// scan finds M <= 0 or a non-finite value.
    explicit MassProfile(SmoothMap1D m);

    [[nodiscard]] const SmoothMap1D& map() const noexcept { return m_; }
    [[nodiscard]] const Interval& domain() const noexcept { return m_.domain(); }
    [[nodiscard]] Jet jet(double x) const { return m_.jet(x); }
    [[nodiscard]] double operator()(double x) const { return m_.eval(x); }

private:
    SmoothMap1D m_;
};

/// Coordinate map g(x) with g' of one strict sign on a bounded domain.
class CoordinateMap {
public:
    static constexpr int kScanPoints = 1024;

    explicit CoordinateMap(SmoothMap1D g);

    [[nodiscard]] const SmoothMap1D& map() const noexcept { return g_; }
    [[nodiscard]] const Interval& domain() const noexcept { return g_.domain(); }
    [[nodiscard]] Jet jet(double x) const { return g_.jet(x); }
    [[nodiscard]] double operator()(double x) const { return g_.eval(x); }

private:
    SmoothMap1D g_;
};

struct QuadratureOptions {
    double tol = 1e-10;
    int max_depth = 48;
    long long max_evals = 2'000'000;
};

/// Adaptive Simpson estimate of the integral of u over [a, b] (b < a allowed,
/// giving the negated value) with error target tol * max(1, int |u|).
/// Throws QuadratureError carrying the best estimate if the refinement depth
/// or evaluation budget is exhausted.
double integrate(const std::function<double(double)>& u, double a, double b,
                 QuadratureOptions opts = {});
double integrate(const SmoothMap1D& u, double a, double b, double tol);

/// Relative deviation |analytic - fd| / (1 + |analytic|) of the order-th
/// derivative from a central difference of eval. Steps are
/// eps^(1/3), eps^(1/4), eps^(1/5) times (1 + |x|) for orders 1, 2, 3.
double fd_consistency(const SmoothMap1D& u, double x, int order);

} // namespace pdm
