#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "perdde/config.hpp"

namespace perdde {

inline constexpr const char* kSchemaVersion = "1.0";
inline constexpr const char* kVersion = "0.1.0";

struct CommandOptions {
  std::string out_dir;  // empty: nothing is written
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool force = false;
};

struct CommandResult {
  nlohmann::json report;
  int exit_code = 1;  // 0 pass, 2 certificate failed, 1 execution error
  std::string headline;
  std::vector<std::string> files;
};

/// Names accepted by run_command.
const std::vector<std::string>& command_names();

/// Runs analyze, verify-domain, solve, floquet or example. Errors are captured
/// in the report; the exit code reflects them.
CommandResult run_command(const std::string& command, const nlohmann::json& config, const CommandOptions& opts);
CommandResult run_command(const std::string& command, RunConfig cfg, const CommandOptions& opts);

/// Fragments shared with the Python bindings.
nlohmann::json certificate_json(const Certificate& cert);
nlohmann::json inward_json(const InwardReport& rep);
nlohmann::json floquet_json(const FloquetReport& rep);

}  // namespace perdde
