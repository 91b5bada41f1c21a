#include "dpgt/history_miner.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <regex>
#include <set>
#include <system_error>

#include "dpgt/error.hpp"
#include "dpgt/process.hpp"

namespace dpgt {

namespace {

constexpr char kRecordSep = '\x1e';
constexpr char kFieldSep = '\x1f';

std::regex compile_fix_pattern(const std::string& pattern) {
  return std::regex(pattern, std::regex::ECMAScript | std::regex::icase);
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim_newlines(std::string_view s) {
  while (!s.empty() && (s.front() == '\n' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<TouchedPath> parse_name_status(std::string_view line) {
  auto cols = split(line, '\t');
  if (cols.size() < 2 || cols[0].empty()) return std::nullopt;
  TouchedPath tp;
  switch (cols[0].front()) {
    case 'A': tp.kind = ChangeKind::Added; break;
    case 'M': tp.kind = ChangeKind::Modified; break;
    case 'D': tp.kind = ChangeKind::Deleted; break;
    case 'T': tp.kind = ChangeKind::TypeChanged; break;
    case 'R': tp.kind = ChangeKind::Renamed; break;
    case 'C': tp.kind = ChangeKind::Copied; break;
    default: return std::nullopt;
  }
  if (tp.kind == ChangeKind::Renamed || tp.kind == ChangeKind::Copied) {
    if (cols.size() < 3) return std::nullopt;
    tp.rename_source = std::string(cols[1]);
    tp.path = std::string(cols[2]);
    if (tp.kind == ChangeKind::Copied) {
      // A copy leaves its source in place; the destination starts fresh.
      tp.kind = ChangeKind::Added;
      tp.rename_source.reset();
    }
  } else {
    tp.path = std::string(cols[1]);
  }
  return tp;
}

bool has_included_extension(const std::string& path, const std::vector<std::string>& exts) {
  if (exts.empty()) return true;
  return std::any_of(exts.begin(), exts.end(),
                     [&](const std::string& ext) { return path.ends_with(ext); });
}

std::vector<EpochSeconds> merge_sorted(const std::vector<EpochSeconds>& a,
                                       const std::vector<EpochSeconds>& b) {
  std::vector<EpochSeconds> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

process::CaptureResult git(const std::filesystem::path& repo, std::vector<std::string> args) {
  std::vector<std::string> argv{"git", "-C", repo.string(), "-c", "core.quotePath=false",
                                "-c", "log.showSignature=false"};
  argv.insert(argv.end(), args.begin(), args.end());
  try {
    return process::run_capture(argv);
  } catch (const std::system_error& e) {
    throw Error(ErrorCode::RepositoryUnreadable, std::string("cannot run git: ") + e.what());
  }
}

}  // namespace

void MiningConfig::validate() const {
  if (window_n < 1) throw Error(ErrorCode::InvalidConfig, "mining.window_n must be >= 1");
  try {
    compile_fix_pattern(fix_pattern);
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::InvalidConfig,
                "mining.fix_pattern does not compile: " + std::string(e.what()));
  }
}

std::vector<CommitRecord> parse_git_log(std::string_view raw) {
  std::vector<CommitRecord> records;
  for (std::string_view chunk : split(raw, kRecordSep)) {
    if (trim_newlines(chunk).empty()) continue;
    auto fields = split(chunk, kFieldSep);
    if (fields.size() != 5)
      throw Error(ErrorCode::RepositoryUnreadable, "unexpected git log record layout");

    CommitRecord rec;
    rec.commit_id = std::string(fields[0]);
    auto ts = fields[1];
    auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), rec.timestamp);
    if (ec != std::errc{} || ptr != ts.data() + ts.size() || rec.timestamp < 0)
      throw Error(ErrorCode::RepositoryUnreadable,
                  "bad commit timestamp '" + std::string(ts) + "' in " + rec.commit_id);
    rec.author_id = to_lower(std::string(fields[2]));
    rec.message = std::string(trim_newlines(fields[3]));
    for (std::string_view line : split(fields[4], '\n')) {
      line = trim_newlines(line);
      if (line.empty()) continue;
      if (auto tp = parse_name_status(line)) rec.touched_paths.push_back(std::move(*tp));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<CommitRecord> read_commits(const std::filesystem::path& repo_path,
                                       const MiningConfig& config) {
  config.validate();
  std::error_code ec;
  if (!std::filesystem::is_directory(repo_path, ec))
    throw Error(ErrorCode::RepositoryNotFound, "no repository at " + repo_path.string());
  if (git(repo_path, {"rev-parse", "--git-dir"}).exit_code != 0)
    throw Error(ErrorCode::RepositoryNotFound, "not a git repository: " + repo_path.string());
  if (git(repo_path, {"rev-parse", "--verify", "-q", "HEAD"}).exit_code != 0)
    throw Error(ErrorCode::EmptyHistory, "repository has no commits: " + repo_path.string());

  std::vector<std::string> args{"log",
                                "--no-color",
                                "--no-ext-diff",
                                "-n",
                                std::to_string(config.window_n),
                                "--format=%x1e%H%x1f%ct%x1f%ae%x1f%B%x1f",
                                "--name-status",
                                config.follow_renames ? "-M" : "--no-renames",
                                "HEAD",
                                "--"};
  auto result = git(repo_path, args);
  if (result.exit_code != 0)
    throw Error(ErrorCode::RepositoryUnreadable, "git log failed: " + result.err);

  auto logged = parse_git_log(result.out);
  if (logged.empty()) throw Error(ErrorCode::EmptyHistory, "git log returned no commits");

  std::vector<CommitRecord> commits;
  commits.reserve(logged.size());
  for (auto it = logged.rbegin(); it != logged.rend(); ++it) {
    CommitRecord rec = std::move(*it);
    std::erase_if(rec.touched_paths, [&](const TouchedPath& tp) {
      return !has_included_extension(tp.path, config.include_extensions);
    });
    if (!config.follow_renames)
      for (auto& tp : rec.touched_paths) tp.rename_source.reset();
    if (!rec.touched_paths.empty()) commits.push_back(std::move(rec));
  }
  return commits;
}

bool classify_fix(std::string_view message, const MiningConfig& config) {
  auto pattern = compile_fix_pattern(config.fix_pattern);
  return std::regex_search(message.begin(), message.end(), pattern);
}

HistoryMap build_histories(const std::vector<CommitRecord>& commits,
                           const MiningConfig& config) {
  struct Accumulator {
    ComponentHistory history;
    std::set<std::string> authors;
  };
  std::map<std::string, Accumulator> live;
  const auto fix_pattern = compile_fix_pattern(config.fix_pattern);

  for (const auto& commit : commits) {
    const bool is_fix = std::regex_search(commit.message, fix_pattern);
    for (const auto& tp : commit.touched_paths) {
      if (config.follow_renames && tp.kind == ChangeKind::Renamed && tp.rename_source &&
          *tp.rename_source != tp.path) {
        auto old = live.find(*tp.rename_source);
        if (old != live.end()) {
          Accumulator moved = std::move(old->second);
          live.erase(old);
          auto& target = live[tp.path];
          auto& h = target.history;
          h.revisions = merge_sorted(h.revisions, moved.history.revisions);
          h.fixes = merge_sorted(h.fixes, moved.history.fixes);
          h.new_author_commits =
              merge_sorted(h.new_author_commits, moved.history.new_author_commits);
          target.authors.merge(moved.authors);
        }
      }

      auto& acc = live[tp.path];
      acc.history.component_id = tp.path;
      if (!is_fix || config.fixes_count_as_revisions)
        acc.history.revisions.push_back(commit.timestamp);
      if (is_fix) acc.history.fixes.push_back(commit.timestamp);
      if (acc.authors.insert(commit.author_id).second)
        acc.history.new_author_commits.push_back(commit.timestamp);
    }
  }

  HistoryMap out;
  for (auto& [path, acc] : live) {
    auto& h = acc.history;
    std::sort(h.revisions.begin(), h.revisions.end());
    std::sort(h.fixes.begin(), h.fixes.end());
    std::sort(h.new_author_commits.begin(), h.new_author_commits.end());
    out.emplace(path, std::move(h));
  }
  return out;
}

nlohmann::json histories_to_json(const HistoryMap& histories) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [id, h] : histories) {
    doc[id] = {{"revisions", h.revisions},
               {"fixes", h.fixes},
               {"new_author_commits", h.new_author_commits}};
  }
  return doc;
}

HistoryMap histories_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, "histories: expected an object");
  HistoryMap out;
  try {
    for (const auto& [id, entry] : doc.items()) {
      ComponentHistory h;
      h.component_id = id;
      h.revisions = entry.at("revisions").get<std::vector<EpochSeconds>>();
      h.fixes = entry.at("fixes").get<std::vector<EpochSeconds>>();
      h.new_author_commits = entry.at("new_author_commits").get<std::vector<EpochSeconds>>();
      out.emplace(id, std::move(h));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("histories: ") + e.what());
  }
  return out;
}

}  // namespace dpgt
