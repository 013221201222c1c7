#pragma once

// Run configuration for the pdmforge command-line tool. A config is a single
// JSON document; every block is optional and falls back to the defaults
// below. Unknown keys are rejected.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdm::cli {

/// Config validation failure. line() is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    int line_;
};

struct SystemBlock {
    std::string kind = "laguerre_exponential";  // or "harmonic_limit"
    double beta = 1.0;
    double nu = 2.0;
    int n_max = 3;
    double split_tol = 1e-8;
};

/// Absent means the default window for the system kind.
struct GridBlock {
    double x_lo = 0.0;
    double x_hi = 0.0;
    std::size_t n_points = 0;
};

struct PerturbationBlock {
    std::string kind = "two_over_g";  // or "custom"
    std::string generator = "zero";   // custom: zero, constant, two_over_g, linear
    double value = 0.0;
    int level = 0;
    double check_tol = 1e-8;
};

struct SolverBlock {
    std::size_t k = 4;
    double solver_tol = 1e-10;
    int max_sweeps = 50;
    double boundary_tol = 1e-10;
    double energy_tol = 1e-3;
    double overlap_tol = 0.999;
};

/// Named built-in with numeric parameters.
struct RegistryEntry {
    std::string kind;
    std::vector<std::pair<std::string, double>> params;
    std::vector<double> coefficients;  // polynomial potential only
    [[nodiscard]] double param(const std::string& name) const;
};

struct SolveBlock {
    RegistryEntry mass{"constant", {{"value", 1.0}}, {}};
    RegistryEntry potential{"harmonic", {{"k", 1.0}}, {}};
    double a = 0.0;
    double b = -1.0;
    double c = 0.0;
};

struct OutputBlock {
    bool eigenvectors = true;
};

struct RunConfig {
    SystemBlock system;
    std::optional<GridBlock> grid;
    PerturbationBlock perturbation;
    SolverBlock solver;
    SolveBlock solve;
    OutputBlock output;
    bool has_solve = false;
};

/// Parses and validates a config document. Throws ConfigError.
RunConfig parse_config(const std::string& text);

/// Reads the file and parses it. Throws ConfigError (line 0 for I/O).
RunConfig load_config(const std::string& path);

} // namespace pdm::cli
