#pragma once

// The four command drivers behind the command-line tool.

#include "trimap/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trimap::commands {

enum class ExitCode : int {
    Ok = 0,
    ValidationError = 2,
    SolverFailure = 3,
    CriterionViolated = 4,
    Inconclusive = 5,
    IoError = 6,
};

enum class Command { Simulate, Analyze, RegionScan, VerifyGlobal };

[[nodiscard]] std::string_view to_string(Command c) noexcept;

// Command-line flags that take precedence over the config file.
//   --tol  sets the orbit tolerance (simulate), the convergence tolerance
//          (verify-global) or the Newton tolerance (analyze, region-scan)
//   --grid sets the sample grid (verify-global), the scan resolution
//          (region-scan) or the root-search grid (analyze)
struct Overrides {
    std::optional<std::string> out;
    std::optional<report::Format> format;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<std::size_t>> grid;
    std::optional<std::size_t> max_iters;
    std::optional<double> tol;
};

/// Applies overrides and re-validates; throws config::ConfigError.
void apply(config::RunConfig& cfg, const Overrides& o, Command c);

// Each driver writes one report to `out` and returns its exit status.
// Validation problems surface as config::ConfigError; solver problems as
// EvaluationError or std::runtime_error.
ExitCode run_simulate(const config::RunConfig& cfg, std::ostream& out);
ExitCode run_analyze(const config::RunConfig& cfg, std::ostream& out);
ExitCode run_region_scan(const config::RunConfig& cfg, std::ostream& out);
ExitCode run_verify_global(const config::RunConfig& cfg, std::ostream& out);

/// One-line JSON diagnostic: {"error": kind, "field": field, "message": message}.
void print_error(std::ostream& err, std::string_view kind, std::string_view field, std::string_view message);

/// Opens the output (stdout when no path is set), runs the command and maps
/// exceptions to exit codes. Diagnostics go to `err` as one JSON object per line.
ExitCode run(Command c, const config::RunConfig& cfg, std::ostream& err);

}  // namespace trimap::commands
