#include "pdmforge/grid.hpp"

#include "pdmforge/errors.hpp"

#include <cmath>
#include <sstream>

namespace pdm {

Grid1D::Grid1D(double x_lo, double x_hi, std::size_t n) : x_lo_(x_lo), x_hi_(x_hi), n_(n) {
    if (!(std::isfinite(x_lo) && std::isfinite(x_hi) && x_hi > x_lo)) {
        std::ostringstream msg;
        msg << "Grid1D: need finite x_lo < x_hi, got [" << x_lo << ", " << x_hi << "]";
        throw DomainError(msg.str());
    }
    if (n < kMinPoints) {
        std::ostringstream msg;
        msg << "Grid1D: need at least " << kMinPoints << " points, got " << n;
        throw DomainError(msg.str());
    }
    dx_ = (x_hi - x_lo) / static_cast<double>(n - 1);
}

std::vector<double> Grid1D::points() const {
    std::vector<double> xs(n_);
    for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
    return xs;
}

double grid_dot(const Grid1D& grid, std::span<const double> a, std::span<const double> b) {
    if (a.size() != grid.size() || b.size() != grid.size()) {
        throw DomainError("grid_dot: sample count does not match the grid");
    }
    double sum = 0.5 * (a.front() * b.front() + a.back() * b.back());
    for (std::size_t i = 1; i + 1 < a.size(); ++i) sum += a[i] * b[i];
    return sum * grid.dx();
}

double grid_norm(const Grid1D& grid, std::span<const double> a) {
    return std::sqrt(grid_dot(grid, a, a));
}

} // namespace pdm
