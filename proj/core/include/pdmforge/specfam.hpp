#pragma once

// Dressed orthogonal-polynomial families F_n(g) = w(g) P_n(g) solving
//   F'' + Q F' + R_n F = 0
// in the weight-absorbed convention, where Q vanishes identically.

#include "pdmforge/field.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pdm {

/// Generalized Laguerre polynomial L_n^nu(g) by three-term recurrence.
/// Requires n >= 0, nu > -1, g >= 0.
double laguerre(int n, double nu, double g);

/// d/dg L_n^nu(g) = -L_{n-1}^{nu+1}(g); exactly 0 for n = 0.
double laguerre_dg(int n, double nu, double g);

/// Physicists' Hermite polynomial H_n(g).
double hermite(int n, double g);

/// Closed-form energy E_n attached to a family by a concrete construction.
using EnergyRule = std::function<double(int n)>;

/// A family F_n(g) together with its Q(g) and R_n(g).
///
/// F is stored as a strictly positive weight times a polynomial so that the
/// logarithmic derivative stays finite where F itself underflows.
class SpectralFamily {
public:
    struct Parts {
        std::string name;
        std::vector<double> params;
        Interval g_domain;
        std::function<double(double)> log_weight;     // ln w(g)
        std::function<double(double)> log_weight_dg;  // w'/w
        std::function<double(int, double)> poly;      // P_n(g)
        std::function<double(int, double)> poly_dg;   // P_n'(g)
        std::function<double(double)> Q;
        std::function<double(double)> dQ;             // dQ/dg
        std::function<double(int, double)> R;
        bool q_vanishes = false;
    };

    explicit SpectralFamily(Parts parts);

    [[nodiscard]] const std::string& name() const noexcept { return p_.name; }
    [[nodiscard]] const std::vector<double>& params() const noexcept { return p_.params; }
    [[nodiscard]] const Interval& g_domain() const noexcept { return p_.g_domain; }
    [[nodiscard]] bool q_vanishes() const noexcept { return p_.q_vanishes; }

    [[nodiscard]] double F(int n, double g) const;
    [[nodiscard]] double dF(int n, double g) const;
    /// ln|F_n(g)|; -inf at a node.
    [[nodiscard]] double log_abs_F(int n, double g) const;
    [[nodiscard]] double poly(int n, double g) const;
    [[nodiscard]] double poly_dg(int n, double g) const;
    /// w'(g)/w(g).
    [[nodiscard]] double weight_log_deriv(double g) const;
    [[nodiscard]] double Q(double g) const;
    [[nodiscard]] double dQ(double g) const;
    [[nodiscard]] double R(int n, double g) const;

    [[nodiscard]] const std::optional<EnergyRule>& energy_rule() const noexcept { return energy_rule_; }
    /// Copy of this family with an energy rule attached.
    [[nodiscard]] SpectralFamily with_energy_rule(EnergyRule rule) const;

private:
    void check(int n, double g) const;

    Parts p_;
    std::optional<EnergyRule> energy_rule_;
};

/// F_n = e^{-g/2} g^{(nu+1)/2} L_n^nu(g), Q = 0,
/// R_n = (2n+nu+1)/(2g) + (1-nu^2)/(4g^2) - 1/4 on g in (0, inf).
SpectralFamily dressed_laguerre_family(double nu);

/// F_n = e^{-g^2/2} H_n(g), Q = 0, R_n = 2n + 1 - g^2 on the real line.
SpectralFamily dressed_hermite_family();

inline constexpr double kDefaultNodeGuard = 1e-12;

/// F'/F at g. Throws NodeProximityError when |P_n(g)| is below
/// node_guard times the largest |P_n| over a small neighbourhood of g.
double log_deriv_F(const SpectralFamily& fam, int n, double g,
                   double node_guard = kDefaultNodeGuard);

} // namespace pdm
