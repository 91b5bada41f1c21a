#pragma once

// Thin POSIX process helpers shared by the git reader and the orchestrator.

#include <sys/types.h>

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dpgt::process {

struct SpawnOptions {
  std::vector<std::string> argv;
  std::filesystem::path workdir;  // empty = inherit
  std::map<std::string, std::string> env_overrides;
  int stdout_fd = -1;  // -1 = inherit
  int stderr_fd = -1;
  bool own_process_group = false;
};

/// Outcome of spawning: either a pid or the errno reported by posix_spawn.
struct SpawnResult {
  pid_t pid = -1;
  int error = 0;

  bool ok() const noexcept { return pid > 0; }
};

SpawnResult spawn(const SpawnOptions& options);

struct ExitInfo {
  bool exited = false;    // normal exit
  int exit_code = 0;      // valid when exited
  int term_signal = 0;    // valid when !exited
};

ExitInfo decode_wait_status(int status) noexcept;

/// Waits for `pid` until `deadline`. Returns nullopt if still running.
std::optional<ExitInfo> wait_until(pid_t pid,
                                   std::chrono::steady_clock::time_point deadline);

/// Sends `signal` to the process group led by `pid`. Only valid for children
/// spawned with own_process_group.
void signal_group(pid_t pid, int signal) noexcept;

struct CaptureResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs argv to completion, capturing stdout and stderr. Throws
/// std::system_error when the program cannot be started.
CaptureResult run_capture(const std::vector<std::string>& argv,
                          const std::filesystem::path& workdir = {});

}  // namespace dpgt::process
