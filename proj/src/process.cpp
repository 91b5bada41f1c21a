#include "dpgt/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <system_error>
#include <thread>

extern char** environ;

namespace dpgt::process {

namespace {

std::vector<std::string> build_environment(
    const std::map<std::string, std::string>& overrides) {
  std::vector<std::string> env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string entry(*e);
    auto eq = entry.find('=');
    std::string key = entry.substr(0, eq);
    if (!overrides.contains(key)) env.push_back(std::move(entry));
  }
  for (const auto& [key, value] : overrides) env.push_back(key + "=" + value);
  return env;
}

std::vector<char*> to_cstrings(std::vector<std::string>& strings) {
  std::vector<char*> out;
  out.reserve(strings.size() + 1);
  for (auto& s : strings) out.push_back(s.data());
  out.push_back(nullptr);
  return out;
}

class FileActions {
 public:
  FileActions() { posix_spawn_file_actions_init(&actions_); }
  ~FileActions() { posix_spawn_file_actions_destroy(&actions_); }
  FileActions(const FileActions&) = delete;
  FileActions& operator=(const FileActions&) = delete;
  posix_spawn_file_actions_t* get() { return &actions_; }

 private:
  posix_spawn_file_actions_t actions_;
};

class SpawnAttr {
 public:
  SpawnAttr() { posix_spawnattr_init(&attr_); }
  ~SpawnAttr() { posix_spawnattr_destroy(&attr_); }
  SpawnAttr(const SpawnAttr&) = delete;
  SpawnAttr& operator=(const SpawnAttr&) = delete;
  posix_spawnattr_t* get() { return &attr_; }

 private:
  posix_spawnattr_t attr_;
};

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_;
};

}  // namespace

SpawnResult spawn(const SpawnOptions& options) {
  if (options.argv.empty()) return {-1, EINVAL};

  std::vector<std::string> args = options.argv;
  std::vector<std::string> env = build_environment(options.env_overrides);
  auto argv = to_cstrings(args);
  auto envp = to_cstrings(env);

  FileActions actions;
  if (options.stdout_fd >= 0)
    posix_spawn_file_actions_adddup2(actions.get(), options.stdout_fd, STDOUT_FILENO);
  if (options.stderr_fd >= 0)
    posix_spawn_file_actions_adddup2(actions.get(), options.stderr_fd, STDERR_FILENO);
  if (!options.workdir.empty())
    posix_spawn_file_actions_addchdir_np(actions.get(), options.workdir.c_str());

  SpawnAttr attr;
  short flags = POSIX_SPAWN_SETSIGMASK | POSIX_SPAWN_SETSIGDEF;
  sigset_t empty_mask;
  sigemptyset(&empty_mask);
  posix_spawnattr_setsigmask(attr.get(), &empty_mask);
  sigset_t default_signals;
  sigemptyset(&default_signals);
  sigaddset(&default_signals, SIGPIPE);
  sigaddset(&default_signals, SIGTERM);
  posix_spawnattr_setsigdefault(attr.get(), &default_signals);
  if (options.own_process_group) {
    flags |= POSIX_SPAWN_SETPGROUP;
    posix_spawnattr_setpgroup(attr.get(), 0);
  }
  posix_spawnattr_setflags(attr.get(), flags);

  pid_t pid = -1;
  int rc = posix_spawnp(&pid, argv[0], actions.get(), attr.get(), argv.data(), envp.data());
  if (rc != 0) return {-1, rc};
  return {pid, 0};
}

ExitInfo decode_wait_status(int status) noexcept {
  ExitInfo info;
  if (WIFEXITED(status)) {
    info.exited = true;
    info.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    info.term_signal = WTERMSIG(status);
  }
  return info;
}

std::optional<ExitInfo> wait_until(pid_t pid,
                                   std::chrono::steady_clock::time_point deadline) {
  using namespace std::chrono_literals;
  auto poll_interval = 1ms;
  for (;;) {
    int status = 0;
    pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) return decode_wait_status(status);
    if (r < 0 && errno != EINTR) return ExitInfo{};
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) return std::nullopt;
    std::this_thread::sleep_for(std::min<std::chrono::steady_clock::duration>(
        poll_interval, deadline - now));
    poll_interval = std::min(poll_interval * 2, std::chrono::milliseconds(20));
  }
}

void signal_group(pid_t pid, int signal) noexcept {
  if (pid <= 0) return;
  ::kill(-pid, signal);
}

CaptureResult run_capture(const std::vector<std::string>& argv,
                          const std::filesystem::path& workdir) {
  std::array<int, 2> out_pipe{};
  std::array<int, 2> err_pipe{};
  if (::pipe2(out_pipe.data(), O_CLOEXEC) != 0)
    throw std::system_error(errno, std::generic_category(), "pipe");
  Fd out_read(out_pipe[0]), out_write(out_pipe[1]);
  if (::pipe2(err_pipe.data(), O_CLOEXEC) != 0)
    throw std::system_error(errno, std::generic_category(), "pipe");
  Fd err_read(err_pipe[0]), err_write(err_pipe[1]);

  SpawnOptions options;
  options.argv = argv;
  options.workdir = workdir;
  options.stdout_fd = out_write.get();
  options.stderr_fd = err_write.get();
  SpawnResult spawned = spawn(options);
  if (!spawned.ok())
    throw std::system_error(spawned.error, std::generic_category(),
                            "cannot start " + argv.front());
  out_write.reset();
  err_write.reset();

  CaptureResult result;
  std::array<pollfd, 2> fds{{{out_read.get(), POLLIN, 0}, {err_read.get(), POLLIN, 0}}};
  std::array<std::string*, 2> sinks{&result.out, &result.err};
  std::array<char, 65536> buffer{};
  int open_streams = 2;
  while (open_streams > 0) {
    if (::poll(fds.data(), fds.size(), -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (fds[i].fd < 0 || fds[i].revents == 0) continue;
      ssize_t n = ::read(fds[i].fd, buffer.data(), buffer.size());
      if (n > 0) {
        sinks[i]->append(buffer.data(), static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        fds[i].fd = -1;
        --open_streams;
      }
    }
  }

  int status = 0;
  while (::waitpid(spawned.pid, &status, 0) < 0 && errno == EINTR) {
  }
  ExitInfo info = decode_wait_status(status);
  result.exit_code = info.exited ? info.exit_code : 128 + info.term_signal;
  return result;
}

}  // namespace dpgt::process
