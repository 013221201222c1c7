#pragma once

#include "pdmforge/field.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace pdm {

/// Uniform grid x_i = x_lo + i*dx, i = 0..N-1, with both end points included.
class Grid1D {
public:
    static constexpr std::size_t kMinPoints = 16;

    /// Throws DomainError unless x_hi > x_lo and n >= 16.
    Grid1D(double x_lo, double x_hi, std::size_t n);

    [[nodiscard]] double x_lo() const noexcept { return x_lo_; }
    [[nodiscard]] double x_hi() const noexcept { return x_hi_; }
    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] double dx() const noexcept { return dx_; }
    [[nodiscard]] double x(std::size_t i) const noexcept {
        return i + 1 == n_ ? x_hi_ : x_lo_ + static_cast<double>(i) * dx_;
    }
    [[nodiscard]] double midpoint() const noexcept { return 0.5 * (x_lo_ + x_hi_); }
    [[nodiscard]] Interval interval() const noexcept { return {x_lo_, x_hi_}; }
    [[nodiscard]] std::vector<double> points() const;

    /// Same window with the spacing halved (2N - 1 points).
    [[nodiscard]] Grid1D refined() const { return Grid1D(x_lo_, x_hi_, 2 * n_ - 1); }

private:
    double x_lo_;
    double x_hi_;
    std::size_t n_;
    double dx_;
};

/// Trapezoid-rule inner product of two grid samples.
double grid_dot(const Grid1D& grid, std::span<const double> a, std::span<const double> b);
double grid_norm(const Grid1D& grid, std::span<const double> a);

} // namespace pdm
