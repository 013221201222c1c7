#include "pdmforge/specfam.hpp"

#include "pdmforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace pdm {

namespace {

void check_laguerre_args(int n, double nu, double g) {
    if (n < 0) throw DomainError("laguerre: n must be non-negative");
    if (!(nu > -1.0)) throw DomainError("laguerre: order nu must exceed -1");
    if (!(g >= 0.0)) throw DomainError("laguerre: argument g must be non-negative");
}

} // namespace

double laguerre(int n, double nu, double g) {
    check_laguerre_args(n, nu, g);
    double prev = 1.0;
    if (n == 0) return prev;
    double cur = 1.0 + nu - g;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 + nu - g) * cur - (k + nu) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

double laguerre_dg(int n, double nu, double g) {
    check_laguerre_args(n, nu, g);
    if (n == 0) return 0.0;
    return -laguerre(n - 1, nu + 1.0, g);
}

double hermite(int n, double g) {
    if (n < 0) throw DomainError("hermite: n must be non-negative");
    double prev = 1.0;
    if (n == 0) return prev;
    double cur = 2.0 * g;
    for (int k = 1; k < n; ++k) {
        const double next = 2.0 * g * cur - 2.0 * k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

SpectralFamily::SpectralFamily(Parts parts) : p_(std::move(parts)) {}

void SpectralFamily::check(int n, double g) const {
    if (n < 0) throw DomainError(p_.name + ": level n must be non-negative");
    if (!p_.g_domain.contains(g)) {
        std::ostringstream msg;
        msg << p_.name << ": g = " << g << " outside the family's domain";
        throw DomainError(msg.str());
    }
}

double SpectralFamily::F(int n, double g) const {
    check(n, g);
    return std::exp(p_.log_weight(g)) * p_.poly(n, g);
}

double SpectralFamily::dF(int n, double g) const {
    check(n, g);
    const double w = std::exp(p_.log_weight(g));
    if (w == 0.0) return 0.0;
    return w * (p_.log_weight_dg(g) * p_.poly(n, g) + p_.poly_dg(n, g));
}

double SpectralFamily::log_abs_F(int n, double g) const {
    check(n, g);
    return p_.log_weight(g) + std::log(std::abs(p_.poly(n, g)));
}

double SpectralFamily::poly(int n, double g) const {
    check(n, g);
    return p_.poly(n, g);
}

double SpectralFamily::poly_dg(int n, double g) const {
    check(n, g);
    return p_.poly_dg(n, g);
}

double SpectralFamily::weight_log_deriv(double g) const {
    check(0, g);
    return p_.log_weight_dg(g);
}

double SpectralFamily::Q(double g) const {
    check(0, g);
    return p_.Q(g);
}

double SpectralFamily::dQ(double g) const {
    check(0, g);
    return p_.dQ(g);
}

double SpectralFamily::R(int n, double g) const {
    check(n, g);
    return p_.R(n, g);
}

SpectralFamily SpectralFamily::with_energy_rule(EnergyRule rule) const {
    SpectralFamily out = *this;
    out.energy_rule_ = std::move(rule);
    return out;
}

SpectralFamily dressed_laguerre_family(double nu) {
    if (!(nu > -1.0)) throw DomainError("dressed_laguerre_family: nu must exceed -1");
    SpectralFamily::Parts p;
    p.name = "dressed_laguerre";
    p.params = {nu};
    p.g_domain = Interval::positive();
    p.log_weight = [nu](double g) { return -0.5 * g + 0.5 * (nu + 1.0) * std::log(g); };
    p.log_weight_dg = [nu](double g) { return -0.5 + 0.5 * (nu + 1.0) / g; };
    p.poly = [nu](int n, double g) { return laguerre(n, nu, g); };
    p.poly_dg = [nu](int n, double g) { return laguerre_dg(n, nu, g); };
    p.Q = [](double) { return 0.0; };
    p.dQ = [](double) { return 0.0; };
    p.R = [nu](int n, double g) {
        return (2.0 * n + nu + 1.0) / (2.0 * g) + (1.0 - nu * nu) / (4.0 * g * g) - 0.25;
    };
    p.q_vanishes = true;
    return SpectralFamily(std::move(p));
}

SpectralFamily dressed_hermite_family() {
    SpectralFamily::Parts p;
    p.name = "dressed_hermite";
    p.g_domain = Interval::real_line();
    p.log_weight = [](double g) { return -0.5 * g * g; };
    p.log_weight_dg = [](double g) { return -g; };
    p.poly = [](int n, double g) { return hermite(n, g); };
    p.poly_dg = [](int n, double g) { return n == 0 ? 0.0 : 2.0 * n * hermite(n - 1, g); };
    p.Q = [](double) { return 0.0; };
    p.dQ = [](double) { return 0.0; };
    p.R = [](int n, double g) { return 2.0 * n + 1.0 - g * g; };
    p.q_vanishes = true;
    return SpectralFamily(std::move(p));
}

double log_deriv_F(const SpectralFamily& fam, int n, double g, double node_guard) {
    const double p = fam.poly(n, g);
    const Interval& dom = fam.g_domain();
    const double delta = 1e-3 * (1.0 + std::abs(g));
    double scale = std::abs(p);
    for (double nb : {g - delta, g + delta}) {
        if (dom.contains(nb)) scale = std::max(scale, std::abs(fam.poly(n, nb)));
    }
    if (!(std::abs(p) > node_guard * scale)) {
        std::ostringstream msg;
        msg << fam.name() << ": F_" << n << " has a node near g = " << g;
        throw NodeProximityError(msg.str(), n, g);
    }
    return fam.weight_log_deriv(g) + fam.poly_dg(n, g) / p;
}

} // namespace pdm
