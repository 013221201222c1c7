#include "pdmforge/field.hpp"

#include "pdmforge/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

namespace pdm {

bool Interval::bounded() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }

Interval intersect(const Interval& a, const Interval& b) {
    Interval out{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
    if (out.empty()) {
        std::ostringstream msg;
        msg << "empty domain intersection of [" << a.lo << ", " << a.hi << "] and [" << b.lo << ", "
            << b.hi << "]";
        throw DomainError(msg.str());
    }
    return out;
}

SmoothMap1D::SmoothMap1D(Interval domain, JetFn fn)
    : domain_(domain), fn_(std::make_shared<const JetFn>(std::move(fn))) {
    if (domain_.empty()) throw DomainError("SmoothMap1D: empty domain");
}

Jet SmoothMap1D::jet(double x) const {
    if (!domain_.contains(x)) {
        std::ostringstream msg;
        msg << "x = " << x << " outside domain [" << domain_.lo << ", " << domain_.hi << "]";
        throw DomainError(msg.str());
    }
    return (*fn_)(x);
}

SmoothMap1D SmoothMap1D::restricted(const Interval& sub) const {
    SmoothMap1D out = *this;
    out.domain_ = intersect(domain_, sub);
    return out;
}

SmoothMap1D constant_map(double c, Interval domain) {
    return {domain, [c](double) { return Jet{c, 0.0, 0.0, 0.0}; }};
}

SmoothMap1D identity_map(Interval domain) {
    return {domain, [](double x) { return Jet{x, 1.0, 0.0, 0.0}; }};
}

SmoothMap1D affine_map(double slope, double offset, Interval domain) {
    return {domain, [slope, offset](double x) { return Jet{slope * x + offset, slope, 0.0, 0.0}; }};
}

SmoothMap1D make_exp_map(double a, double b, Interval domain) {
    return {domain, [a, b](double x) {
                const double u = std::exp(a * x + b);
                return Jet{u, a * u, a * a * u, a * a * a * u};
            }};
}

SmoothMap1D power_map(double p, Interval domain) {
    const bool integer = std::floor(p) == p;
    if (!integer && domain.lo < 0.0) {
        throw DomainError("power_map: non-integer exponent needs a non-negative domain");
    }
    return {domain, [p](double x) {
                const double v = std::pow(x, p);
                const double d1 = p * std::pow(x, p - 1.0);
                const double d2 = p * (p - 1.0) * std::pow(x, p - 2.0);
                const double d3 = p * (p - 1.0) * (p - 2.0) * std::pow(x, p - 3.0);
                return Jet{v, d1, d2, d3};
            }};
}

SmoothMap1D polynomial_map(std::vector<double> coeffs, Interval domain) {
    return {domain, [c = std::move(coeffs)](double x) {
                // Horner on value and derivatives simultaneously.
                Jet j;
                for (auto it = c.rbegin(); it != c.rend(); ++it) {
                    j.d3 = j.d3 * x + 3.0 * j.d2;
                    j.d2 = j.d2 * x + 2.0 * j.d1;
                    j.d1 = j.d1 * x + j.v;
                    j.v = j.v * x + *it;
                }
                return j;
            }};
}

SmoothMap1D operator+(const SmoothMap1D& u, const SmoothMap1D& v) {
    return {intersect(u.domain(), v.domain()), [u, v](double x) {
                const Jet a = u.jet(x);
                const Jet b = v.jet(x);
                return Jet{a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3};
            }};
}

SmoothMap1D operator-(const SmoothMap1D& u, const SmoothMap1D& v) { return u + (-1.0) * v; }

SmoothMap1D operator*(const SmoothMap1D& u, const SmoothMap1D& v) {
    return {intersect(u.domain(), v.domain()), [u, v](double x) {
                const Jet a = u.jet(x);
                const Jet b = v.jet(x);
                return Jet{a.v * b.v, a.d1 * b.v + a.v * b.d1,
                           a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2,
                           a.d3 * b.v + 3.0 * a.d2 * b.d1 + 3.0 * a.d1 * b.d2 + a.v * b.d3};
            }};
}

SmoothMap1D operator*(double s, const SmoothMap1D& u) {
    return {u.domain(), [s, u](double x) {
                const Jet a = u.jet(x);
                return Jet{s * a.v, s * a.d1, s * a.d2, s * a.d3};
            }};
}

SmoothMap1D compose(const SmoothMap1D& outer, const SmoothMap1D& inner) {
    return {inner.domain(), [outer, inner](double x) {
                const Jet g = inner.jet(x);
                const Jet f = outer.jet(g.v);
                // Faa di Bruno to third order.
                return Jet{f.v, f.d1 * g.d1, f.d2 * g.d1 * g.d1 + f.d1 * g.d2,
                           f.d3 * g.d1 * g.d1 * g.d1 + 3.0 * f.d2 * g.d1 * g.d2 + f.d1 * g.d3};
            }};
}

SmoothMap1D reciprocal(const SmoothMap1D& u) {
    const SmoothMap1D inv{Interval::real_line(), [](double y) {
                              if (y == 0.0) throw DomainError("reciprocal of zero");
                              const double r = 1.0 / y;
                              return Jet{r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r};
                          }};
    return compose(inv, u);
}

SmoothMap1D exp_of(const SmoothMap1D& u) {
    const SmoothMap1D e{Interval::real_line(), [](double y) {
                            const double v = std::exp(y);
                            return Jet{v, v, v, v};
                        }};
    return compose(e, u);
}

MassProfile::MassProfile(SmoothMap1D m) : m_(std::move(m)) {
    const Interval& d = m_.domain();
    if (!d.bounded()) throw ConstructionError("MassProfile: domain must be bounded");
    for (int i = 0; i < kScanPoints; ++i) {
        const double x = d.lo + (d.hi - d.lo) * i / (kScanPoints - 1);
        const double v = m_.eval(x);
        if (!(v > 0.0) || !std::isfinite(v)) {
            std::ostringstream msg;
            msg << "MassProfile: M(" << x << ") = " << v << " is not positive and finite";
            throw ConstructionError(msg.str());
        }
    }
}

CoordinateMap::CoordinateMap(SmoothMap1D g) : g_(std::move(g)) {
    const Interval& d = g_.domain();
    if (!d.bounded()) throw ConstructionError("CoordinateMap: domain must be bounded");
    double sign = 0.0;
    for (int i = 0; i < kScanPoints; ++i) {
        const double x = d.lo + (d.hi - d.lo) * i / (kScanPoints - 1);
        const Jet j = g_.jet(x);
        if (!std::isfinite(j.v) || !std::isfinite(j.d1) || j.d1 == 0.0 ||
            (sign != 0.0 && std::signbit(j.d1) != std::signbit(sign))) {
            std::ostringstream msg;
            msg << "CoordinateMap: g is not strictly monotone near x = " << x << " (g' = " << j.d1
                << ")";
            throw ConstructionError(msg.str());
        }
        sign = j.d1;
    }
}

namespace {

struct SimpsonPanel {
    double a, m, b;
    double fa, fm, fb;
    double whole;
};

struct SimpsonState {
    const std::function<double(double)>& f;
    int max_depth;
    long long evals_left;
    bool failed = false;
};

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double refine(SimpsonState& st, const SimpsonPanel& p, double tol, int depth) {
    const double lm = 0.5 * (p.a + p.m);
    const double rm = 0.5 * (p.m + p.b);
    st.evals_left -= 2;
    const double flm = st.f(lm);
    const double frm = st.f(rm);
    const double left = simpson(p.a, p.m, p.fa, flm, p.fm);
    const double right = simpson(p.m, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    // Out of depth, out of budget, or panels at rounding resolution.
    if (depth >= st.max_depth || st.evals_left <= 0 || lm <= p.a || rm >= p.b) {
        st.failed = true;
        return left + right + delta / 15.0;
    }
    return refine(st, {p.a, lm, p.m, p.fa, flm, p.fm, left}, 0.5 * tol, depth + 1) +
           refine(st, {p.m, rm, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth + 1);
}

} // namespace

double integrate(const std::function<double(double)>& u, double a, double b, QuadratureOptions opts) {
    if (!(opts.tol > 0.0)) throw DomainError("integrate: tol must be positive");
    if (a == b) return 0.0;
    if (b < a) return -integrate(u, b, a, opts);

    // Four initial panels so that symmetric integrands do not fool the first
    // error estimate.
    constexpr int kPanels = 4;
    SimpsonState st{u, opts.max_depth, opts.max_evals};
    const double h = (b - a) / kPanels;
    std::array<SimpsonPanel, kPanels> panels{};
    double fa = u(a);
    double coarse_abs = 0.0;
    for (int i = 0; i < kPanels; ++i) {
        const double lo = a + i * h;
        const double hi = (i + 1 == kPanels) ? b : a + (i + 1) * h;
        const double mid = 0.5 * (lo + hi);
        const double fm = u(mid);
        const double fb = u(hi);
        panels[i] = {lo, mid, hi, fa, fm, fb, simpson(lo, hi, fa, fm, fb)};
        coarse_abs += simpson(lo, hi, std::abs(fa), std::abs(fm), std::abs(fb));
        fa = fb;
    }
    // Error target tol * max(1, int |u|), split evenly over the panels.
    const double target = opts.tol * std::max(1.0, coarse_abs);
    double total = 0.0;
    for (const SimpsonPanel& p : panels) total += refine(st, p, target / kPanels, 0);
    if (st.failed || !std::isfinite(total)) {
        std::ostringstream msg;
        msg << "integrate: no convergence on [" << a << ", " << b << "] within depth " << opts.max_depth
            << " and " << opts.max_evals << " evaluations";
        throw QuadratureError(msg.str(), total);
    }
    return total;
}

double integrate(const SmoothMap1D& u, double a, double b, double tol) {
    if (!u.domain().contains(a) || !u.domain().contains(b)) {
        throw DomainError("integrate: bounds outside the map's domain");
    }
    return integrate([&u](double x) { return u.eval(x); }, a, b, QuadratureOptions{tol});
}

double fd_consistency(const SmoothMap1D& u, double x, int order) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const Jet j = u.jet(x);
    double analytic = 0.0;
    double fd = 0.0;
    switch (order) {
    case 1: {
        const double h = std::cbrt(eps) * (1.0 + std::abs(x));
        fd = (u.eval(x + h) - u.eval(x - h)) / (2.0 * h);
        analytic = j.d1;
        break;
    }
    case 2: {
        const double h = std::pow(eps, 0.25) * (1.0 + std::abs(x));
        fd = (u.eval(x + h) - 2.0 * j.v + u.eval(x - h)) / (h * h);
        analytic = j.d2;
        break;
    }
    case 3: {
        const double h = std::pow(eps, 0.2) * (1.0 + std::abs(x));
        fd = (u.eval(x + 2.0 * h) - 2.0 * u.eval(x + h) + 2.0 * u.eval(x - h) - u.eval(x - 2.0 * h)) /
             (2.0 * h * h * h);
        analytic = j.d3;
        break;
    }
    default:
        throw DomainError("fd_consistency: order must be 1, 2 or 3");
    }
    return std::abs(analytic - fd) / (1.0 + std::abs(analytic));
}

} // namespace pdm
