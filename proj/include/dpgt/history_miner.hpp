#pragma once

// Extracts per-file Revisions / Fixes / Authors timestamp series from a git
// repository.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dpgt {

using EpochSeconds = std::int64_t;

enum class ChangeKind { Added, Modified, Deleted, Renamed, Copied, TypeChanged };

struct TouchedPath {
  std::string path;
  ChangeKind kind = ChangeKind::Modified;
  std::optional<std::string> rename_source;

  bool operator==(const TouchedPath&) const = default;
};

struct CommitRecord {
  std::string commit_id;
  EpochSeconds timestamp = 0;  // committer time, UTC
  std::string author_id;       // lowercased email
  std::string message;
  std::vector<TouchedPath> touched_paths;

  bool operator==(const CommitRecord&) const = default;
};

struct ComponentHistory {
  std::string component_id;
  std::vector<EpochSeconds> revisions;
  std::vector<EpochSeconds> fixes;
  std::vector<EpochSeconds> new_author_commits;

  bool operator==(const ComponentHistory&) const = default;
};

using HistoryMap = std::map<std::string, ComponentHistory>;

inline constexpr std::string_view kDefaultFixPattern = "(fix(e[sd])?|bug|defect|patch|fault)";

struct MiningConfig {
  int window_n = 500;
  std::string fix_pattern{kDefaultFixPattern};
  std::vector<std::string> include_extensions{".java"};
  bool follow_renames = true;
  /// When false, a fix commit is recorded only under fixes, not revisions.
  bool fixes_count_as_revisions = true;

  /// Throws Error(InvalidConfig) on window_n < 1 or an uncompilable pattern.
  void validate() const;
};

/// Reads the newest `window_n` commits reachable from HEAD, oldest first.
/// Merge commits contribute no touched paths and are dropped, as is any commit
/// whose paths are all filtered out by include_extensions.
std::vector<CommitRecord> read_commits(const std::filesystem::path& repo_path,
                                       const MiningConfig& config);

/// Parses the raw output of the git log invocation used by read_commits.
/// Exposed for testing; records come back in log order (newest first).
std::vector<CommitRecord> parse_git_log(std::string_view raw);

bool classify_fix(std::string_view message, const MiningConfig& config);

HistoryMap build_histories(const std::vector<CommitRecord>& commits,
                           const MiningConfig& config);

nlohmann::json histories_to_json(const HistoryMap& histories);
HistoryMap histories_from_json(const nlohmann::json& doc);

}  // namespace dpgt
