#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "morsekit/config.hpp"

namespace morsekit {

/// CLI-level options shared by all subcommands.
struct CommandOptions {
    std::optional<std::filesystem::path> trace_path; ///< fit input
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed_override;      ///< --seed beats noise.seed
};

/// Subcommand bodies. Each writes its output files atomically under
/// options.out_dir plus a run manifest, and returns the process exit code
/// (0 on success; cmd_fit returns 4 with the report still written when the
/// fit did not converge). Domain failures escape as exceptions and are
/// mapped to exit codes by run_cli.
int cmd_simulate(const RunConfig& config, const CommandOptions& options);
int cmd_fit(const RunConfig& config, const CommandOptions& options);
int cmd_pulsed(const RunConfig& config, const CommandOptions& options);
int cmd_estimate(const RunConfig& config, const CommandOptions& options);

/// Full command-line entry: parse argv, load the config, dispatch, and map
/// errors to exit codes (0 ok, 2 config, 3 parse, 4 non-convergence,
/// 5 singular/estimation, 1 unexpected).
int run_cli(int argc, const char* const* argv);

} // namespace morsekit
