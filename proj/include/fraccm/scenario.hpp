#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fraccm/bounds.hpp"
#include "fraccm/hierarchy.hpp"

// Configuration-driven runs behind the `fraccm` command-line tool.
//
// Config format: UTF-8 text, one `section.key = value` per line, `#` starts a
// comment. Lists are comma separated. Recognised keys:
//
//   model.alpha  model.kappa  model.C
//   kernel.shape kernel.width kernel.mass
//   grid.dimension grid.length grid.points
//   chain.N_max  chain.times  chain.s_nodes
//   output.dir   run.seed     report.probe

namespace fraccm {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitNumerical = 2,
  kExitConfig = 3,
  kExitIo = 4,
};

struct ScenarioConfig {
  ChainConfig chain;
  std::string output_dir = ".";
  /// Reserved; the core is deterministic and never draws random numbers.
  long long seed = 0;
  /// Keys that were absent from the text and took their default value.
  std::vector<std::string> defaulted;

  /// Resolved configuration in the input format, defaults marked.
  std::string echo() const;
};

/// Parses and validates a config text. Throws ConfigError listing every
/// violation with its line number or key.
ScenarioConfig parse_config(const std::string& text);

/// Reads `path` (IoError when unreadable) and parses it.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Parses "0.5, 1, 2" style lists; ConfigError on malformed entries.
std::vector<double> parse_number_list(const std::string& text, const std::string& what);

struct RunOptions {
  /// Overrides output.dir when set.
  std::optional<std::filesystem::path> out_dir;
  /// Overrides chain.times when set.
  std::optional<std::vector<double>> times;
  /// verify: keep only rows of this check.
  std::string check;
  /// Progress and diagnostics; may be null.
  std::ostream* log = nullptr;
};

/// Writes chain_norms.csv (n,t,max_norm,probe_value) and run_meta.txt.
/// Completed rows are flushed before a numerical error propagates.
int run_solve(const ScenarioConfig& config, const RunOptions& options);

/// Writes bound_report.csv; returns kExitCheckFailed if any row fails.
int run_bounds(const ScenarioConfig& config, const RunOptions& options);

/// Names accepted by the verify --check filter.
const std::vector<std::string>& verify_check_names();

/// Writes identities.csv; returns kExitCheckFailed if any row fails.
int run_verify(const ScenarioConfig& config, const RunOptions& options);

struct TableRange {
  double start = 0.0;
  double stop = 1.0;
  int count = 11;
};

/// Parses "start:stop:count".
TableRange parse_table_range(const std::string& text);

/// Prints `x<TAB>value` rows of E, E2, Phi or Gamma.
int run_table(const std::string& function, const TableRange& range, double alpha, double beta, std::ostream& out);

/// Maps a library exception to the process exit code.
int exit_code_for(const std::exception& error);

/// Shortest decimal form that reads back to the same double.
std::string format_number(double value);

}  // namespace fraccm
