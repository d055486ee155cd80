#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace kbte::cli {

struct RunOptions {
  std::optional<std::uint64_t> seed;
  /// Resolved worker count (flag, then KINETIC_BTE_WORKERS, then 1).
  int workers = 1;
  std::optional<std::filesystem::path> out;
  /// Write a snapshot every K-th output time; 0 disables.
  int snapshot_every = 0;
};

const std::vector<std::string>& command_names();

/// Runs one subcommand; throws on failure.
void run_command(const std::string& command, Scenario scenario, const RunOptions& options,
                 std::ostream& log);

/// 0 success, 1 I/O, 2 configuration, 3 numerical failure.
int exit_code_for(const std::exception& e);

/// run_command with errors reported on `err` and mapped to exit codes.
int dispatch(const std::string& command, const Scenario& scenario, const RunOptions& options,
             std::ostream& log, std::ostream& err);

}  // namespace kbte::cli
