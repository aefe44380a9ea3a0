#pragma once

#include "pjinv/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

namespace pjinv {

/// Exit codes shared by every command.
enum ExitCode : int { kSuccess = 0, kNegative = 1, kConfigError = 2, kComputationError = 3 };

/// Settings of one CLI run. File form: flat `key = value` lines, `#`
/// comments, booleans true/false, vectors as comma-separated floats.
/// Tolerances are keyed `tol.<name>`, grid sizes `grid.<name>`.
struct RunConfig {
  std::string map_id = "identity";
  std::string provider = "exact";
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;
  std::map<std::string, int> grids;
  std::string out_path;
  std::string csv_path;

  bool analytic_beta = false;
  bool negative_control = false;
  bool timing = false;
  std::string method = "path";
  std::string suite;
  std::string target;  // comma-separated floats
  std::string x0;
  std::string point;
  double t_max = 10.0;
  double delta = 1.0;
  double lambda = 1e-3;
  double eps = 1e-6;

  double tol(const std::string& name, double fallback) const;
  int grid(const std::string& name, int fallback) const;

  /// Applies one `key = value` pair; throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
};

/// Reads a config file into cfg (keys in the file override current values).
void load_config_file(const std::string& path, RunConfig& cfg);

Vector parse_vector(const std::string& text);

/// Runs `catalog`, `certify`, `invert`, `ball-check`, `profile` or `check`.
/// The report (or trace stream) goes to `out`, diagnostics to `err`;
/// CSV output goes to cfg.csv_path when set. Returns an ExitCode.
int run_command(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Rounds to 12 significant digits, the precision used in every report.
double round12(double value);

}  // namespace pjinv
