#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of an operation or function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature hit its refinement limit before meeting the tolerance.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double best_estimate)
        : Error(what), best_estimate_(best_estimate) {}
    [[nodiscard]] double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

/// Inputs that cannot form a valid object (non-positive mass, flat coordinate map, ...).
class ConstructionError : public Error {
public:
    using Error::Error;
};

/// The level-split of the solvable branch is not x-independent.
class InconsistencyError : public Error {
public:
    InconsistencyError(const std::string& what, int level, double deviation)
        : Error(what), level_(level), deviation_(deviation) {}
    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] double deviation() const noexcept { return deviation_; }

private:
    int level_;
    double deviation_;
};

/// Evaluation too close to a zero of F(g), where F'/F is singular.
class NodeProximityError : public Error {
public:
    NodeProximityError(const std::string& what, int level, double g)
        : Error(what), level_(level), g_(g) {}
    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] double g() const noexcept { return g_; }

private:
    int level_;
    double g_;
};

/// A sampled state has (numerically) no support on the grid.
class DegenerateSupportError : public Error {
public:
    using Error::Error;
};

/// Eigensolver failure for a given level.
class SolverError : public Error {
public:
    SolverError(const std::string& what, int level) : Error(what), level_(level) {}
    [[nodiscard]] int level() const noexcept { return level_; }

private:
    int level_;
};

/// A state does not decay inside the grid window.
class BoundaryLeakError : public Error {
public:
    BoundaryLeakError(const std::string& what, int level, double leak)
        : Error(what), level_(level), leak_(leak) {}
    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] double leak() const noexcept { return leak_; }

private:
    int level_;
    double leak_;
};

/// An operation was called on an object it does not apply to.
class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace pdm
