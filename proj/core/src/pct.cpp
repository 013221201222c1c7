#include "pdmforge/pct.hpp"

#include "pdmforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

namespace pdm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ln f(x). g' has one sign on the whole domain, so for decreasing g the
// factor (M/g')^{1/2} differs from (M/|g'|)^{1/2} by a constant phase only.
double log_f(const MassProfile& mass, const CoordinateMap& coord, const SpectralFamily& family,
             double x, double x_ref) {
    const double ratio = mass(x) / std::abs(coord.jet(x).d1);
    if (!(ratio > 0.0) || !std::isfinite(ratio)) {
        std::ostringstream msg;
        msg << "build_f: M/|g'| = " << ratio << " is not positive and finite at x = " << x
            << "; (M, g) is not a consistent pair";
        throw ConstructionError(msg.str());
    }
    double out = 0.5 * std::log(ratio);
    if (!family.q_vanishes()) {
        const double g_ref = coord(x_ref);
        const double g = coord(x);
        out += 0.5 * integrate([&family](double y) { return family.Q(y); }, g_ref, g,
                               QuadratureOptions{kDefaultQuadTol});
    }
    return out;
}

// Unnormalized log|psi_n| and sign on the grid.
struct LogSamples {
    std::vector<double> log_abs;
    std::vector<double> sign;
};

LogSamples log_psi(const PctInputs& inp, int n) {
    const Grid1D& grid = inp.grid;
    const double x_ref = grid.midpoint();
    LogSamples out{std::vector<double>(grid.size()), std::vector<double>(grid.size())};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i);
        const double g = inp.coord(x);
        const double p = inp.family.poly(n, g);
        out.log_abs[i] = log_f(inp.mass, inp.coord, inp.family, x, x_ref) + inp.family.log_abs_F(n, g);
        out.sign[i] = p < 0.0 ? -1.0 : 1.0;
    }
    return out;
}

// exp(log) normalized on the grid, first nonzero sample positive.
std::vector<double> normalize_from_logs(const Grid1D& grid, const std::vector<double>& log_abs,
                                        const std::vector<double>& sign) {
    double shift = -kInf;
    for (double l : log_abs) {
        if (std::isfinite(l)) shift = std::max(shift, l);
    }
    if (!std::isfinite(shift)) throw DegenerateSupportError("state has no support on the grid");
    std::vector<double> psi(log_abs.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        psi[i] = std::isnan(log_abs[i]) ? 0.0 : sign[i] * std::exp(log_abs[i] - shift);
    }
    const double norm = grid_norm(grid, psi);
    if (!(norm > 1e-300) || !std::isfinite(norm)) {
        throw DegenerateSupportError("state norm vanishes on the grid; window does not cover it");
    }
    auto first = std::find_if(psi.begin(), psi.end(), [](double v) { return v != 0.0; });
    const double s = (first != psi.end() && *first < 0.0) ? -1.0 : 1.0;
    for (double& v : psi) v *= s / norm;
    return psi;
}

void check_level(const ConstructedSystem& sys, int n) {
    if (n < 0 || n > sys.n_max()) {
        std::ostringstream msg;
        msg << "level " << n << " not constructed (n_max = " << sys.n_max() << ")";
        throw DomainError(msg.str());
    }
}

// Grid point g value of the first node of P_n, or NaN.
double first_node_g(const PctInputs& inp, int n) {
    const Grid1D& grid = inp.grid;
    double prev = inp.family.poly(n, inp.coord(grid.x(0)));
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double g = inp.coord(grid.x(i));
        const double p = inp.family.poly(n, g);
        if (p == 0.0 || (p < 0.0) != (prev < 0.0)) return g;
        prev = p;
    }
    return kNaN;
}

[[noreturn]] void refuse_excited(const ConstructedSystem& sys, int n) {
    const double g = first_node_g(sys.inputs, n);
    std::ostringstream msg;
    msg << "level " << n << ": F_n has nodes (first near g = " << g
        << "); extensions of excited levels need the node-guard override";
    throw NodeProximityError(msg.str(), n, g);
}

} // namespace

PctInputs make_pct_inputs(MassProfile mass, CoordinateMap coord, SpectralFamily family, Grid1D grid) {
    const Interval window = grid.interval();
    if (!mass.domain().contains(window)) throw DomainError("PctInputs: mass domain does not cover the grid");
    if (!coord.domain().contains(window)) {
        throw DomainError("PctInputs: coordinate-map domain does not cover the grid");
    }
    for (double x : {grid.x_lo(), grid.x_hi()}) {
        const double g = coord(x);
        if (!family.g_domain().contains(g)) {
            std::ostringstream msg;
            msg << "PctInputs: g(" << x << ") = " << g << " outside the domain of " << family.name();
            throw DomainError(msg.str());
        }
    }
    return PctInputs{std::move(mass), std::move(coord), std::move(family), grid};
}

double build_f(const MassProfile& mass, const CoordinateMap& coord, const SpectralFamily& family,
               double x, double x_ref) {
    return std::exp(log_f(mass, coord, family, x, x_ref));
}

double log_deriv_f(const PctInputs& inp, double x) {
    const Jet m = inp.mass.jet(x);
    const Jet g = inp.coord.jet(x);
    double out = 0.5 * (m.d1 / m.v - g.d2 / g.d1);
    if (!inp.family.q_vanishes()) out += 0.5 * inp.family.Q(g.v) * g.d1;
    return out;
}

RhsTerms rhs_solvable_terms(const PctInputs& inp, int n, double x) {
    const Jet m = inp.mass.jet(x);
    const Jet g = inp.coord.jet(x);
    // Ratios first: they stay O(1) where M or g' are exponentially large or small.
    const double gr2 = g.d2 / g.d1;
    const double gr3 = g.d3 / g.d1;
    const double mr1 = m.d1 / m.v;
    const double mr2 = m.d2 / m.v;
    const double t_g3 = 0.5 * gr3;
    const double t_g2 = 0.75 * gr2 * gr2;
    const double t_m2 = 0.5 * mr2;
    const double t_m1 = 0.75 * mr1 * mr1;
    const double jac = g.d1 * g.d1 / m.v;

    const double r = inp.family.R(n, g.v);
    double q_terms = 0.0;
    if (!inp.family.q_vanishes()) {
        const double q = inp.family.Q(g.v);
        q_terms = 0.5 * inp.family.dQ(g.v) + 0.25 * q * q;
    }

    RhsTerms out;
    out.value = ((t_g3 - t_g2) - (t_m2 - t_m1)) / m.v + jac * (r - q_terms);
    out.magnitude = (std::abs(t_g3) + t_g2 + std::abs(t_m2) + t_m1) / m.v +
                    jac * (std::abs(r) + std::abs(q_terms));
    return out;
}

double rhs_solvable(const PctInputs& inp, int n, double x) { return rhs_solvable_terms(inp, n, x).value; }

LevelTable evaluate_levels(const PctInputs& inp, int n_max) {
    if (n_max < 0) throw DomainError("evaluate_levels: n_max must be non-negative");
    const std::size_t levels = static_cast<std::size_t>(n_max) + 1;
    LevelTable t{std::vector<std::vector<double>>(levels, std::vector<double>(inp.grid.size())),
                 std::vector<std::vector<double>>(levels, std::vector<double>(inp.grid.size()))};
    for (std::size_t n = 0; n < levels; ++n) {
        for (std::size_t i = 0; i < inp.grid.size(); ++i) {
            const RhsTerms terms = rhs_solvable_terms(inp, static_cast<int>(n), inp.grid.x(i));
            t.W[n][i] = terms.value;
            t.magnitude[n][i] = terms.magnitude;
        }
    }
    return t;
}

double split_deviation(const LevelTable& table, const std::vector<double>& E, bool scaled) {
    double worst = 0.0;
    for (std::size_t n = 1; n < table.W.size(); ++n) {
        for (std::size_t i = 0; i < table.W[n].size(); ++i) {
            double dev = std::abs((table.W[n][i] - table.W[0][i]) - (E[n] - E[0]));
            if (scaled) dev /= std::max({1.0, table.magnitude[n][i], table.magnitude[0][i]});
            if (std::isnan(dev)) return kInf;
            worst = std::max(worst, dev);
        }
    }
    return worst;
}

EnergySplit split_energy_potential(const LevelTable& table, const std::optional<EnergyRule>& rule,
                                   double split_tol) {
    if (table.W.empty() || table.W.size() != table.magnitude.size()) {
        throw DomainError("split_energy_potential: empty or ragged level table");
    }
    const std::size_t levels = table.W.size();
    const std::size_t points = table.W[0].size();
    EnergySplit out;
    out.E.resize(levels);
    out.V.resize(points);
    if (rule) {
        for (std::size_t n = 0; n < levels; ++n) out.E[n] = (*rule)(static_cast<int>(n));
        for (std::size_t i = 0; i < points; ++i) out.V[i] = out.E[0] - table.W[0][i];
        out.gauge_note = "energies from the closed-form rule; V = E_0 - W_0";
    } else {
        out.E[0] = 0.0;
        for (std::size_t n = 1; n < levels; ++n) {
            double sum = 0.0;
            for (std::size_t i = 0; i < points; ++i) sum += table.W[n][i] - table.W[0][i];
            out.E[n] = sum / static_cast<double>(points);
        }
        for (std::size_t i = 0; i < points; ++i) out.V[i] = -table.W[0][i];
        out.gauge_note = "gauge E_0 = 0; V = -W_0; E_n = grid mean of W_n - W_0";
    }
    out.max_deviation = split_deviation(table, out.E, true);
    out.max_abs_deviation = split_deviation(table, out.E, false);
    if (!(out.max_deviation <= split_tol)) {
        int worst_level = 1;
        double worst = -1.0;
        for (std::size_t n = 1; n < levels; ++n) {
            LevelTable pair{{table.W[0], table.W[n]}, {table.magnitude[0], table.magnitude[n]}};
            const double d = split_deviation(pair, {out.E[0], out.E[n]}, true);
            if (!(d <= worst)) {
                worst = d;
                worst_level = static_cast<int>(n);
            }
        }
        std::ostringstream msg;
        msg << "level split is x-dependent: deviation " << out.max_deviation << " > " << split_tol
            << " at level " << worst_level << "; (M, g, F) is not a solvable triple";
        throw InconsistencyError(msg.str(), worst_level, out.max_deviation);
    }
    return out;
}

std::vector<double> assemble_psi(const PctInputs& inp, int n) {
    const LogSamples s = log_psi(inp, n);
    return normalize_from_logs(inp.grid, s.log_abs, s.sign);
}

ConstructedSystem construct_system(const PctInputs& inp, int n_max, SystemProvenance provenance,
                                   double split_tol) {
    const LevelTable table = evaluate_levels(inp, n_max);
    EnergySplit split = split_energy_potential(table, inp.family.energy_rule(), split_tol);
    ConstructedSystem sys{inp, std::move(provenance), std::move(split.V), std::move(split.E), {},
                          std::move(split.gauge_note), split.max_deviation};
    sys.psi.reserve(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) sys.psi.push_back(assemble_psi(inp, n));
    return sys;
}

Grid1D default_exponential_grid(double beta) {
    if (!(beta > 0.0)) throw DomainError("default_exponential_grid: beta must be positive");
    return Grid1D(-10.0 / beta, 25.0 / beta, 8000);
}

ConstructedSystem construct_laguerre_exponential(double beta, double nu, int n_max, const Grid1D& grid,
                                                 double split_tol) {
    if (!(beta > 0.0)) throw DomainError("construct_laguerre_exponential: beta must be positive");
    if (!(nu > -1.0)) throw DomainError("construct_laguerre_exponential: nu must exceed -1");
    // M = lambda g' with lambda = -1/beta, so M and g coincide.
    const SmoothMap1D u = make_exp_map(-beta, 0.0, grid.interval());
    SpectralFamily fam = dressed_laguerre_family(nu).with_energy_rule(
        [beta, nu](int n) { return beta * beta * (n + 0.5 * (nu + 1.0)); });
    PctInputs inp = make_pct_inputs(MassProfile(u), CoordinateMap(u), std::move(fam), grid);
    return construct_system(inp, n_max, {"laguerre_exponential", beta, nu}, split_tol);
}

double laguerre_exponential_potential(double beta, double nu, double x) {
    return 0.25 * beta * beta * ((nu * nu - 1.0) * std::exp(beta * x) + std::exp(-beta * x));
}

Grid1D default_harmonic_grid() { return Grid1D(-8.0, 8.0, 2000); }

ConstructedSystem construct_harmonic_limit(int n_max, const Grid1D& grid, double split_tol) {
    SpectralFamily fam =
        dressed_hermite_family().with_energy_rule([](int n) { return 2.0 * n + 1.0; });
    PctInputs inp = make_pct_inputs(MassProfile(constant_map(1.0, grid.interval())),
                                    CoordinateMap(identity_map(grid.interval())), std::move(fam), grid);
    return construct_system(inp, n_max, {"harmonic_limit"}, split_tol);
}

DeltaQ delta_q_zero() {
    return {"zero", constant_map(0.0),
            [](const ConstructedSystem&, int) -> std::optional<double> { return 0.0; }};
}

DeltaQ delta_q_constant(double c) {
    std::ostringstream label;
    label << "constant(" << c << ")";
    return {label.str(), constant_map(c), nullptr};
}

DeltaQ delta_q_two_over_g() {
    return {"two_over_g", 2.0 * power_map(-1.0, Interval::positive()),
            [](const ConstructedSystem& sys, int) -> std::optional<double> {
                if (sys.provenance.kind != "laguerre_exponential") return std::nullopt;
                return sys.provenance.beta * sys.provenance.beta;
            }};
}

DeltaQ delta_q_linear(double c) {
    std::ostringstream label;
    label << "linear(" << c << ")";
    return {label.str(), c * identity_map(), nullptr};
}

double h_from_deltaQ(const SmoothMap1D& dq, const CoordinateMap& coord, double x_ref, double x,
                     double tol) {
    const double s = integrate(
        [&](double t) {
            const Jet g = coord.jet(t);
            return dq.eval(g.v) * g.d1;
        },
        x_ref, x, QuadratureOptions{tol});
    return std::exp(0.5 * s);
}

SmoothMap1D moderating_map(const SmoothMap1D& dq, const CoordinateMap& coord, double x_ref, double tol) {
    return {coord.domain(), [dq, coord, x_ref, tol](double x) {
                const double h = h_from_deltaQ(dq, coord, x_ref, x, tol);
                const Jet g = coord.jet(x);
                const Jet q = dq.jet(g.v);
                const double u = 0.5 * q.v * g.d1;
                const double u1 = 0.5 * (q.d1 * g.d1 * g.d1 + q.v * g.d2);
                const double u2 = 0.5 * (q.d2 * g.d1 * g.d1 * g.d1 + 3.0 * q.d1 * g.d1 * g.d2 + q.v * g.d3);
                return Jet{h, u * h, (u1 + u * u) * h, (u2 + 3.0 * u * u1 + u * u * u) * h};
            }};
}

SmoothMap1D log_moderating_map(const SmoothMap1D& dq, const CoordinateMap& coord, double x_ref, double tol) {
    return {coord.domain(), [dq, coord, x_ref, tol](double x) {
                const double s = integrate(
                    [&](double t) {
                        const Jet gt = coord.jet(t);
                        return dq.eval(gt.v) * gt.d1;
                    },
                    x_ref, x, QuadratureOptions{tol});
                const Jet g = coord.jet(x);
                const Jet q = dq.jet(g.v);
                return Jet{0.5 * s, 0.5 * q.v * g.d1, 0.5 * (q.d1 * g.d1 * g.d1 + q.v * g.d2),
                           0.5 * (q.d2 * g.d1 * g.d1 * g.d1 + 3.0 * q.d1 * g.d1 * g.d2 + q.v * g.d3)};
            }};
}

namespace {

// D from hp = h'/h and hpp = h''/h.
double eq13_from_ratios(const PctInputs& inp, int n, double hp, double hpp, double x, double node_guard) {
    const Jet m = inp.mass.jet(x);
    if (hp == 0.0) return -hpp / m.v;
    const Jet g = inp.coord.jet(x);
    const double fpf = log_deriv_f(inp, x);
    const double Fpf = log_deriv_F(inp.family, n, g.v, node_guard);
    return -(hpp + 2.0 * hp * (fpf + g.d1 * Fpf - 0.5 * m.d1 / m.v)) / m.v;
}

} // namespace

double delta_rhs_eq13(const PctInputs& inp, int n, const SmoothMap1D& h, double x, double node_guard) {
    const Jet hj = h.jet(x);
    if (!(hj.v > 0.0)) throw DomainError("delta_rhs_eq13: h must be positive");
    return eq13_from_ratios(inp, n, hj.d1 / hj.v, hj.d2 / hj.v, x, node_guard);
}

double delta_rhs_eq13_log(const PctInputs& inp, int n, const SmoothMap1D& log_h, double x, double node_guard) {
    const Jet l = log_h.jet(x);
    return eq13_from_ratios(inp, n, l.d1, l.d2 + l.d1 * l.d1, x, node_guard);
}

double delta_rhs_eq10(const PctInputs& inp, int n, const SmoothMap1D& dq, double x, double node_guard) {
    const Jet m = inp.mass.jet(x);
    const Jet g = inp.coord.jet(x);
    const Jet q = dq.jet(g.v);
    if (q.v == 0.0 && q.d1 == 0.0) return 0.0;
    const double fpf = log_deriv_f(inp, x);
    const double prefactor = g.d2 + 2.0 * fpf * g.d1 - m.d1 * g.d1 / m.v;
    const double Fpf = q.v == 0.0 ? 0.0 : log_deriv_F(inp.family, n, g.v, node_guard);
    const double jac = g.d1 * g.d1 / m.v;
    return -0.5 * prefactor * q.v / m.v - jac * (Fpf * q.v + 0.5 * q.d1 + 0.25 * q.v * q.v);
}

PerturbationResult apply_deltaQ(const ConstructedSystem& sys, int n, const DeltaQ& dq,
                                const PerturbOptions& opts) {
    check_level(sys, n);
    if (n >= 1 && !opts.override_node_guard) refuse_excited(sys, n);

    const PctInputs& inp = sys.inputs;
    const Grid1D& grid = inp.grid;
    const std::size_t N = grid.size();

    PerturbationResult out;
    out.level = n;
    out.D.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double x = grid.x(i);
        try {
            out.D[i] = delta_rhs_eq10(inp, n, dq.q, x, opts.node_guard);
        } catch (const NodeProximityError&) {
            if (!opts.override_node_guard) throw;
            out.D[i] = kNaN;
            ++out.masked_points;
            continue;
        }
        if (!std::isfinite(out.D[i])) {
            std::ostringstream msg;
            msg << "apply_deltaQ: non-finite D at x = " << x;
            throw DomainError(msg.str());
        }
    }

    std::optional<double> shift;
    if (dq.energy_shift) shift = dq.energy_shift(sys, n);
    out.deltaE = shift.value_or(0.0);
    out.energy_gauge = !shift.has_value();
    out.label = dq.label + (out.energy_gauge ? " [gauge deltaE = 0, deltaV = -D]" : " [closed-form deltaE]");
    out.deltaV.resize(N);
    for (std::size_t i = 0; i < N; ++i) out.deltaV[i] = out.deltaE - out.D[i];

    // Cumulative exponent S(x_i) = int_{g(x_ref)}^{g(x_i)} dQ, segment by segment.
    auto integrand = [&](double t) {
        const Jet g = inp.coord.jet(t);
        return dq.q.eval(g.v) * g.d1;
    };
    const QuadratureOptions qopts{opts.quad_tol};
    std::vector<double> cumulative(N, 0.0);
    for (std::size_t i = 1; i < N; ++i) {
        cumulative[i] = cumulative[i - 1] + integrate(integrand, grid.x(i - 1), grid.x(i), qopts);
    }
    const double x_ref = grid.midpoint();
    const auto ref_idx = static_cast<std::size_t>((x_ref - grid.x_lo()) / grid.dx());
    const double s_ref = cumulative[ref_idx] + integrate(integrand, grid.x(ref_idx), x_ref, qopts);

    LogSamples logs = log_psi(inp, n);
    out.h.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double half_s = 0.5 * (cumulative[i] - s_ref);
        out.h[i] = std::exp(half_s);
        logs.log_abs[i] += half_s;
    }
    out.psi_ext = normalize_from_logs(grid, logs.log_abs, logs.sign);
    return out;
}

PerturbationResult deltaQ_2_over_g(const ConstructedSystem& sys, int n, const PerturbOptions& opts) {
    if (sys.provenance.kind != "laguerre_exponential") {
        throw UsageError("deltaQ_2_over_g: closed form exists only for the exponential Laguerre system");
    }
    check_level(sys, n);
    if (n >= 1 && !opts.override_node_guard) refuse_excited(sys, n);

    const PctInputs& inp = sys.inputs;
    const Grid1D& grid = inp.grid;
    const std::size_t N = grid.size();
    const double beta = sys.provenance.beta;
    const double nu = sys.provenance.nu;
    const double b2 = beta * beta;
    const SmoothMap1D dq = delta_q_two_over_g().q;

    PerturbationResult out;
    out.label = "two_over_g [closed form: deltaE = beta^2, h = g]";
    out.level = n;
    out.deltaE = b2;
    out.energy_gauge = false;
    out.h.resize(N);
    out.D.resize(N);
    out.deltaV.resize(N);

    LogSamples logs = log_psi(inp, n);
    for (std::size_t i = 0; i < N; ++i) {
        const double x = grid.x(i);
        const double g = inp.coord(x);
        out.h[i] = g;
        logs.log_abs[i] += std::log(g);

        double poly_ratio = 0.0;  // L_n'/L_n
        if (n > 0) {
            try {
                poly_ratio = log_deriv_F(inp.family, n, g, opts.node_guard) -
                             inp.family.weight_log_deriv(g);
            } catch (const NodeProximityError&) {
                out.D[i] = out.deltaV[i] = kNaN;
                ++out.masked_points;
                continue;
            }
        }
        out.deltaV[i] = b2 * (nu + 1.0) * std::exp(beta * x) + 2.0 * b2 * poly_ratio;
        out.D[i] = out.deltaE - out.deltaV[i];

        const double d10 = delta_rhs_eq10(inp, n, dq, x, opts.node_guard);
        // dE - dV = -(2/(lambda g)) psi'/psi with lambda = -1/beta.
        const double psi_log_deriv = log_deriv_f(inp, x) + inp.coord.jet(x).d1 *
                                     (inp.family.weight_log_deriv(g) + poly_ratio);
        const double d21 = 2.0 * beta / g * psi_log_deriv;
        const double scale = std::max(1.0, std::abs(out.D[i]));
        for (double d : {d10, d21}) {
            if (!(std::abs(d - out.D[i]) <= opts.check_tol * scale)) {
                std::ostringstream msg;
                msg << "deltaQ_2_over_g: closed form disagrees with D at x = " << x << " (" << out.D[i]
                    << " vs " << d << ")";
                throw InconsistencyError(msg.str(), n, std::abs(d - out.D[i]) / scale);
            }
        }
    }
    out.psi_ext = normalize_from_logs(grid, logs.log_abs, logs.sign);
    return out;
}

} // namespace pdm
