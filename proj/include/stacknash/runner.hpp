#pragma once

#include <string>

#include "stacknash/config.hpp"

namespace stacknash {

inline constexpr const char* kArtifactVersion = "0.1.0";

enum class Command { kSolve, kNash, kHum, kSweep, kObservability, kValidate };

Command command_from_name(const std::string& name);

/// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one pipeline: writes CSV/JSON artifacts plus manifest.json into
/// out_dir (created if missing). The manifest is written even on failure and
/// references every artifact produced.
int run_scenario(const ScenarioConfig& cfg, Command command, const std::string& out_dir);

/// Convenience for the CLI: parse, build, run; config problems exit 2.
int run_from_file(const std::string& config_path, Command command,
                  const std::string& out_dir, const std::uint64_t* seed_override);

}  // namespace stacknash
