#pragma once

#include "pdmforge/cli/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace pdm::cli {

/// Process exit codes. Each library error class maps to exactly one code.
enum ExitCode : int {
    kExitOk = 0,
    kExitVerifyFailed = 1,  // verify ran but a level missed its tolerance
    kExitConfig = 2,        // ConfigError, DomainError, ConstructionError, UsageError
    kExitInconsistency = 3, // InconsistencyError
    kExitNode = 4,          // NodeProximityError
    kExitBoundary = 5,      // BoundaryLeakError, DegenerateSupportError
    kExitSolver = 6,        // SolverError, QuadratureError
    kExitIo = 7,            // output directory or file not writable
};

struct CommandOptions {
    bool override_node_guard = false;
};

/// Thrown when an output file cannot be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Each command writes its files into out_dir (created if missing) and
// throws on failure. cmd_verify returns whether every level passed.
void cmd_construct(const RunConfig& cfg, const std::filesystem::path& out_dir);
void cmd_perturb(const RunConfig& cfg, const std::filesystem::path& out_dir, const CommandOptions& opts);
bool cmd_verify(const RunConfig& cfg, const std::filesystem::path& out_dir);
void cmd_solve(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Loads the config, dispatches, and maps errors to exit codes with a
/// one-line message on err.
int run_command(const std::string& command, const std::string& config_path, const std::string& out_dir,
                const CommandOptions& opts, std::ostream& err);

} // namespace pdm::cli
