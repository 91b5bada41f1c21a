#pragma once

// Runs an external per-component test generator under the budgets of an
// AllocationPlan, killing any child that overruns budget + grace.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpgt/budget_allocator.hpp"

namespace dpgt {

struct GeneratorSpec {
  /// Whitespace-separated argv; single or double quotes group words.
  /// Placeholders: {component}, {budget_seconds}, {output_dir}.
  std::string command_template;
  double grace_seconds = 1.0;
  std::filesystem::path workdir;
  std::map<std::string, std::string> env_overrides;
  /// Receives per-component logs and output directories.
  std::filesystem::path output_root = "out";

  void validate() const;
};

enum class ExitStatus { Ok, NonZero, TimedOut, SpawnFailed };

const char* to_string(ExitStatus status) noexcept;

struct RunOutcome {
  std::string component_id;
  int rank = 0;
  int tier = 1;
  double requested_budget_seconds = 0.0;
  double wall_seconds = 0.0;
  ExitStatus exit_status = ExitStatus::Ok;
  int exit_code = 0;  // NonZero: the code; SpawnFailed: errno
  std::filesystem::path output_dir;
};

/// Maps a component path to a file-name-safe token.
std::string sanitize_component(const std::string& component_id);

/// Splits the template into argv and substitutes placeholders in each word.
std::vector<std::string> expand_command(const std::string& command_template,
                                        const std::string& component, double budget_seconds,
                                        const std::filesystem::path& output_dir);

/// Renders a budget without trailing zeros: 38.4368, 3.
std::string format_budget(double seconds);

/// One outcome per plan entry, in rank order. Spawn failures are recorded,
/// never thrown.
std::vector<RunOutcome> run_plan(const AllocationPlan& plan, const GeneratorSpec& spec,
                                 int parallelism);

struct RunSummary {
  int ok = 0;
  int nonzero = 0;
  int timed_out = 0;
  int spawn_failed = 0;
  double total_wall_seconds = 0.0;
  std::map<int, double> tier_utilization;  // tier -> sum wall / sum requested
};

RunSummary summarize_runs(const std::vector<RunOutcome>& outcomes);

nlohmann::json runs_to_json(const std::vector<RunOutcome>& outcomes);

}  // namespace dpgt
