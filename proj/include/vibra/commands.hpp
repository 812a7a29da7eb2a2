#pragma once

// Subcommands. Each writes its CSVs plus summary.json and timing.json into
// cfg.out_dir. Everything but timing.json is a pure function of the config.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "vibra/config.hpp"

namespace vibra {

inline constexpr int kSchemaVersion = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

struct CommandOutput {
  nlohmann::json summary;                    // contents of summary.json
  std::vector<std::filesystem::path> files;  // every file written, in order
};

CommandOutput cmd_sample(const RunConfig& cfg);
CommandOutput cmd_pendulum(const RunConfig& cfg);
CommandOutput cmd_analytic(const RunConfig& cfg);
CommandOutput cmd_edge(const RunConfig& cfg);
CommandOutput cmd_thermo(const RunConfig& cfg);
CommandOutput cmd_selftest(const RunConfig& cfg);

/// Validates, dispatches on cfg.command and writes summary.json / timing.json.
CommandOutput run(const RunConfig& cfg);

/// Parses argv, runs, and prints written paths (or an error object) to out.
/// Returns 0, 1 (validation) or 2 (numerical failure).
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest round-trip decimal form; "nan" / "inf" / "-inf" otherwise.
std::string format_double(double v);

}  // namespace vibra
