#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "obstacle/benchmark.hpp"

namespace obstacle {

struct RunConfig {
  MethodKind method = MethodKind::stabilized;
  int degree = 1;
  double alpha = 0.01;
  MeshFamily family = MeshFamily::nonconforming;
  double initial_h = 0.5;
  int levels = 3;
  SolverOptions solver;
  double theta = 0.9;
  int dof_budget = 30000;
  std::string output_dir;  // empty: out/<config hash>
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : "config field '" + field + "': " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Parses a flat JSON object. Missing keys keep their defaults; alpha defaults
/// to 0.1 for k = 2. Unknown keys and out-of-range values throw ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of every field that affects results (output_dir excluded).
std::string canonical_config(const RunConfig& config);
/// 64-bit FNV-1a of the canonical form, as 16 hex digits.
std::string config_hash(const RunConfig& config);

std::filesystem::path resolve_output_dir(const RunConfig& config, const std::optional<std::filesystem::path>& cli_out);

namespace exit_code {
constexpr int ok = 0;
constexpr int config_error = 1;
constexpr int not_converged = 2;
constexpr int check_failed = 3;
}  // namespace exit_code

/// Shared CSV header for every subcommand; unused columns are left empty.
const std::string& csv_header();

int run_solve(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);
int run_converge(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);
int run_adapt(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);
int run_check(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

/// Dispatches by subcommand name and maps exceptions to exit codes.
int run_command(const std::string& command, const RunConfig& config, const std::filesystem::path& out,
                std::ostream& log);

}  // namespace obstacle
