#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "bwave/grid.hpp"
#include "bwave/reaction.hpp"
#include "config.hpp"

namespace bwave::cli {

inline constexpr int format_version = 1;

enum ExitCode : int {
  exit_ok = 0,
  exit_validation_failure = 1,
  exit_config_error = 2,
  exit_nonconvergence = 3,
};

struct RunOptions {
  std::filesystem::path out_dir;  // empty: config output.dir
  bool serial = false;
  int workers = 1;
};

ReactionTerm make_reaction(const ReactionBlock& block);
GridSpec make_grid(const GridBlock& block);

/// Writes to `path.tmp` and renames over `path`.
void write_atomically(const std::filesystem::path& path, const std::string& content);

/// Runs config.command, writes artifacts, logs progress to `log` and returns
/// an ExitCode. Configuration problems throw ConfigError.
int run(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

}  // namespace bwave::cli
