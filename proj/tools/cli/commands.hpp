#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace multicrit::cli {

struct RunOptions {
  std::filesystem::path out_dir = "out";
  int jobs = 1;
  bool serial = false;
  /// Overrides the command's main tolerance when set.
  std::optional<double> tol;

  int workers() const { return serial ? 1 : std::max(jobs, 1); }
};

/// Files are held in memory until the whole command succeeded, so a failing
/// run leaves no partial outputs behind.
struct CommandOutput {
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<nlohmann::json> points;
  nlohmann::json summary = nlohmann::json::object();
};

enum ExitCode { kSuccess = 0, kFailure = 1, kConfigError = 2, kNonConvergence = 3 };

const std::vector<std::string>& command_names();

/// Runs one subcommand on a config text and writes outputs plus manifest.json.
/// Throws ConfigError / ConvergenceError; see exit_code().
CommandOutput run_command(const std::string& command, const std::string& config_text, const RunOptions& opts);

/// run_command with exceptions mapped to exit codes and messages on stderr.
/// A non-convergence additionally leaves failure.json in the output directory.
int run_and_report(const std::string& command, const std::string& config_text, const RunOptions& opts);

}  // namespace multicrit::cli
