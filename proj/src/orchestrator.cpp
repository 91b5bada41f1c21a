#include "dpgt/orchestrator.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <mutex>
#include <thread>

#include "dpgt/csv.hpp"
#include "dpgt/error.hpp"
#include "dpgt/process.hpp"

namespace dpgt {

namespace {

using Clock = std::chrono::steady_clock;

// How long a child gets between SIGTERM and SIGKILL.
constexpr auto kTermToKill = std::chrono::milliseconds(500);

std::vector<std::string> tokenize(const std::string& command) {
  std::vector<std::string> words;
  std::string word;
  bool in_word = false;
  char quote = 0;
  for (char c : command) {
    if (quote != 0) {
      if (c == quote) {
        quote = 0;
      } else {
        word += c;
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_word = true;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (in_word) words.push_back(std::move(word));
      word.clear();
      in_word = false;
    } else {
      word += c;
      in_word = true;
    }
  }
  if (quote != 0) throw Error(ErrorCode::InvalidConfig, "generator command has an open quote");
  if (in_word) words.push_back(std::move(word));
  return words;
}

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RunOutcome run_one(const AllocationEntry& entry, const GeneratorSpec& spec) {
  RunOutcome outcome;
  outcome.component_id = entry.component_id;
  outcome.rank = entry.rank;
  outcome.tier = entry.tier;
  outcome.requested_budget_seconds = entry.budget_seconds;

  const std::string token = sanitize_component(entry.component_id);
  outcome.output_dir = spec.output_root / token;
  const auto log_path = spec.output_root / (token + ".log");
  const auto start = Clock::now();

  auto fail = [&](int err) {
    outcome.exit_status = ExitStatus::SpawnFailed;
    outcome.exit_code = err;
    outcome.wall_seconds = seconds_since(start);
    return outcome;
  };

  std::error_code ec;
  std::filesystem::create_directories(outcome.output_dir, ec);
  if (ec) return fail(ec.value());
  int log_fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (log_fd < 0) return fail(errno);

  process::SpawnOptions options;
  options.argv = expand_command(spec.command_template, entry.component_id, entry.budget_seconds,
                                outcome.output_dir);
  options.workdir = spec.workdir;
  options.env_overrides = spec.env_overrides;
  options.stdout_fd = log_fd;
  options.stderr_fd = log_fd;
  options.own_process_group = true;

  auto spawned = process::spawn(options);
  ::close(log_fd);
  if (!spawned.ok()) return fail(spawned.error);

  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(
                  entry.budget_seconds + spec.grace_seconds));
  auto exit = process::wait_until(spawned.pid, deadline);
  if (!exit) {
    process::signal_group(spawned.pid, SIGTERM);
    exit = process::wait_until(spawned.pid, Clock::now() + kTermToKill);
    if (!exit) {
      process::signal_group(spawned.pid, SIGKILL);
      int status = 0;
      while (::waitpid(spawned.pid, &status, 0) < 0 && errno == EINTR) {
      }
    }
    outcome.exit_status = ExitStatus::TimedOut;
  } else if (exit->exited && exit->exit_code == 0) {
    outcome.exit_status = ExitStatus::Ok;
  } else {
    outcome.exit_status = ExitStatus::NonZero;
    outcome.exit_code = exit->exited ? exit->exit_code : 128 + exit->term_signal;
  }
  outcome.wall_seconds = seconds_since(start);
  // Reap stragglers the generator left in its process group.
  process::signal_group(spawned.pid, SIGKILL);
  return outcome;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (command_template.find("{component}") == std::string::npos ||
      command_template.find("{budget_seconds}") == std::string::npos)
    throw Error(ErrorCode::InvalidConfig,
                "generator.command_template must contain {component} and {budget_seconds}");
  if (tokenize(command_template).empty())
    throw Error(ErrorCode::InvalidConfig, "generator.command_template is empty");
  if (!(grace_seconds >= 0.0))
    throw Error(ErrorCode::InvalidConfig, "generator.grace_seconds must be >= 0");
}

const char* to_string(ExitStatus status) noexcept {
  switch (status) {
    case ExitStatus::Ok: return "ok";
    case ExitStatus::NonZero: return "nonzero";
    case ExitStatus::TimedOut: return "timed_out";
    case ExitStatus::SpawnFailed: return "spawn_failed";
  }
  return "unknown";
}

std::string sanitize_component(const std::string& component_id) {
  std::string out = component_id;
  for (char& c : out) {
    const auto u = static_cast<unsigned char>(c);
    if (!std::isalnum(u) && c != '.' && c != '_' && c != '-') c = '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

std::string format_budget(double seconds) {
  std::string s = csv::fixed(seconds, 4);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

std::vector<std::string> expand_command(const std::string& command_template,
                                        const std::string& component, double budget_seconds,
                                        const std::filesystem::path& output_dir) {
  auto words = tokenize(command_template);
  const std::string budget = format_budget(budget_seconds);
  for (auto& w : words) {
    replace_all(w, "{component}", component);
    replace_all(w, "{budget_seconds}", budget);
    replace_all(w, "{output_dir}", output_dir.string());
  }
  return words;
}

std::vector<RunOutcome> run_plan(const AllocationPlan& plan, const GeneratorSpec& spec,
                                 int parallelism) {
  spec.validate();
  if (parallelism < 1) throw Error(ErrorCode::InvalidInput, "parallelism must be >= 1");
  std::filesystem::create_directories(spec.output_root);

  std::vector<RunOutcome> outcomes;
  outcomes.reserve(plan.entries.size());
  std::mutex outcomes_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < plan.entries.size(); i = next++) {
      RunOutcome outcome = run_one(plan.entries[i], spec);
      std::lock_guard lock(outcomes_mutex);
      outcomes.push_back(std::move(outcome));
    }
  };
  {
    const auto workers = std::min<std::size_t>(parallelism, plan.entries.size());
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }

  std::sort(outcomes.begin(), outcomes.end(), [](const RunOutcome& a, const RunOutcome& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.component_id < b.component_id;
  });
  return outcomes;
}

RunSummary summarize_runs(const std::vector<RunOutcome>& outcomes) {
  RunSummary summary;
  std::map<int, std::pair<double, double>> per_tier;  // wall, requested
  for (const auto& o : outcomes) {
    switch (o.exit_status) {
      case ExitStatus::Ok: ++summary.ok; break;
      case ExitStatus::NonZero: ++summary.nonzero; break;
      case ExitStatus::TimedOut: ++summary.timed_out; break;
      case ExitStatus::SpawnFailed: ++summary.spawn_failed; break;
    }
    summary.total_wall_seconds += o.wall_seconds;
    auto& [wall, requested] = per_tier[o.tier];
    wall += o.wall_seconds;
    requested += o.requested_budget_seconds;
  }
  for (const auto& [tier, totals] : per_tier)
    summary.tier_utilization[tier] = totals.second > 0.0 ? totals.first / totals.second : 0.0;
  return summary;
}

nlohmann::json runs_to_json(const std::vector<RunOutcome>& outcomes) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& o : outcomes) {
    doc.push_back({{"component", o.component_id},
                   {"rank", o.rank},
                   {"tier", o.tier},
                   {"requested_budget_seconds", o.requested_budget_seconds},
                   {"wall_seconds", o.wall_seconds},
                   {"exit_status", to_string(o.exit_status)},
                   {"exit_code", o.exit_code},
                   {"output_dir", o.output_dir.string()}});
  }
  return doc;
}

}  // namespace dpgt
