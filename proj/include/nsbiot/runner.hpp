#pragma once

#include "nsbiot/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace nsbiot {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3 };

/// Command-line values that take precedence over the config file.
struct RunOverrides {
    std::optional<std::string> out_dir;
    std::optional<int> threads;
    std::optional<std::string> levels;
};

/// SHA-1 of "blob <size>\0<content>", as printed by `git hash-object`.
std::string git_blob_sha1(const std::string& content);

/// Parse, apply overrides and validate. Throws ConfigError.
ScenarioConfig prepare_config(const std::string& text, const RunOverrides& o);

/// Each command reports progress and errors on `log` and returns an exit code.
/// Nothing is written to disk unless the config parses and validates.
int cmd_validate(const std::string& config_path, const RunOverrides& o, std::ostream& log);
int cmd_run(const std::string& config_path, const RunOverrides& o, std::ostream& log);
/// Like run, restricted to the manufactured-solution scenario.
int cmd_convergence(const std::string& config_path, const RunOverrides& o, std::ostream& log);

} // namespace nsbiot
