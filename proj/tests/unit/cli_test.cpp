#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dpgt/cli.hpp"
#include "dpgt/process.hpp"
#include "support/git_fixture.hpp"

using fixture::kBase;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result dpgt_cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"dpgt"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = dpgt::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("binary reports version and help") {
  auto v = dpgt::process::run_capture({DPGT_CLI_PATH, "--version"});
  CHECK(v.exit_code == 0);
  CHECK(v.out.find(dpgt::cli::kVersion) != std::string::npos);
  auto h = dpgt::process::run_capture({DPGT_CLI_PATH, "--help"});
  CHECK(h.exit_code == 0);
  CHECK(h.out.find("allocate") != std::string::npos);
  auto none = dpgt::process::run_capture({DPGT_CLI_PATH});
  CHECK(none.exit_code == 2);
  CHECK(dpgt::process::run_capture({DPGT_CLI_PATH, "frobnicate"}).exit_code == 2);
}

TEST_CASE("predict, allocate and run end to end") {
  fixture::TempDir dir("cli");
  const fs::path repo = dir.path() / "repo";
  fs::create_directories(repo);
  fixture::build_standard_repo(repo);
  const std::string out = (dir.path() / "out").string();

  auto p = dpgt_cli({"--output-root", out, "predict", repo.string()});
  REQUIRE(p.code == 0);
  auto hist = nlohmann::json::parse(slurp(fs::path(out) / "histories.json"));
  CHECK(hist["src/A.java"]["fixes"] == nlohmann::json({kBase + 100, kBase + 400}));
  CHECK(hist["src/C.java"]["new_author_commits"] == nlohmann::json({kBase, kBase + 300}));
  auto scores = slurp(fs::path(out) / "scores.csv");
  CHECK(scores.rfind("component,score,probability,", 0) == 0);
  // C.java's recent revisions outweigh A.java's older fix.
  CHECK(scores.find("src/C.java") < scores.find("src/A.java"));
  CHECK(fs::exists(fs::path(out) / "t_dp.txt"));

  const std::string scores_path = (fs::path(out) / "scores.csv").string();
  const std::string t_dp_path = (fs::path(out) / "t_dp.txt").string();
  auto a = dpgt_cli({"--output-root", out, "--quiet", "allocate", scores_path,
                     "--per-class-budget", "15", "--t-dp-file", t_dp_path, "--t-dp", "0"});
  REQUIRE(a.code == 0);
  CHECK(a.out.empty());
  auto alloc = slurp(fs::path(out) / "allocation.csv");
  CHECK(alloc.rfind("component,probability,rank,normalized_rank,tier,weight,budget_seconds\nsrc/C.java,", 0) == 0);
  CHECK(alloc.find(",1,0.000000,1,1.000000000,27.0000\n") != std::string::npos);
  CHECK(alloc.find(",2,0.000000,2,1.000000000,3.0000\n") != std::string::npos);

  const std::string alloc_path = (fs::path(out) / "allocation.csv").string();
  auto r = dpgt_cli({"--output-root", out, "run", alloc_path, "--parallelism", "2", "--command",
                     "sh -c 'echo $0 > \"$2/done\"' {component} {budget_seconds} {output_dir}"});
  CHECK(r.code == 0);
  CHECK(r.out.find("ok=2") != std::string::npos);
  auto runs = nlohmann::json::parse(slurp(fs::path(out) / "runs.json"));
  CHECK(runs.size() == 2);
  CHECK(slurp(fs::path(out) / "src_A.java" / "done") == "src/A.java\n");
}

TEST_CASE("exit codes") {
  fixture::TempDir dir("cli-codes");
  const std::string out = (dir.path() / "out").string();
  const fs::path scores = dir.path() / "scores.csv";
  std::ofstream(scores) << "component,score,probability,twr_revisions,twr_fixes,twr_authors\n"
                           "A.java,1,0.632121,1,1,1\nB.java,0.1,0.095163,0.1,0.1,0.1\n";

  CHECK(dpgt_cli({"--output-root", out, "allocate", scores.string()}).code == 2);
  CHECK(dpgt_cli({"--output-root", out, "allocate", scores.string(), "--total-budget", "10",
                  "--per-class-budget", "5"})
            .code == 2);
  auto infeasible = dpgt_cli({"--output-root", out, "allocate", scores.string(), "--single-tier",
                              "--t-min", "10", "--total-budget", "15"});
  CHECK(infeasible.code == 4);
  CHECK(infeasible.err.find("shortfall 5.0000") != std::string::npos);
  CHECK(dpgt_cli({"--output-root", out, "allocate", (dir.path() / "nope.csv").string(),
                  "--total-budget", "10"})
            .code == 3);
  CHECK(dpgt_cli({"--output-root", out, "predict", "/nonexistent/dpgt"}).code == 3);

  std::ofstream(dir.path() / "bad.json") << R"({"unknown": true})";
  CHECK(dpgt_cli({"--config", (dir.path() / "bad.json").string(), "allocate", scores.string(),
                  "--total-budget", "100"})
            .code == 2);

  const fs::path empty_alloc = dir.path() / "empty.csv";
  std::ofstream(empty_alloc)
      << "component,probability,rank,normalized_rank,tier,weight,budget_seconds\n";
  CHECK(dpgt_cli({"--output-root", out, "run", empty_alloc.string(), "--command",
                  "x {component} {budget_seconds}"})
            .code == 2);
  REQUIRE(dpgt_cli({"--output-root", out, "allocate", scores.string(), "--total-budget", "60"})
              .code == 0);
  CHECK(dpgt_cli({"--output-root", out, "run", (fs::path(out) / "allocation.csv").string()})
            .code == 2);
  CHECK(dpgt_cli({"--output-root", out, "run", (fs::path(out) / "allocation.csv").string(),
                  "--parallelism", "0", "--command", "x {component} {budget_seconds}"})
            .code == 2);
}

TEST_CASE("stats prints U, p and A12") {
  fixture::TempDir dir("cli-stats");
  std::ofstream(dir.path() / "x.txt") << "1\n2\n\n3\n";
  std::ofstream(dir.path() / "y.txt") << "4\n5\n6\n";
  auto s = dpgt_cli({"stats", (dir.path() / "x.txt").string(), (dir.path() / "y.txt").string()});
  CHECK(s.code == 0);
  CHECK(s.out == "u=0\np_two_tailed=0.1\na12=0\n");
  std::ofstream(dir.path() / "bad.txt") << "1\nabc\n";
  CHECK(dpgt_cli({"stats", (dir.path() / "bad.txt").string(), (dir.path() / "y.txt").string()})
            .code == 3);
}

TEST_CASE("simulate writes bit-stable reports") {
  fixture::TempDir dir("cli-sim");
  const fs::path scenario = dir.path() / "scenario.json";
  std::ofstream(scenario) << R"({"n_components": 40, "n_buggy": 8, "runs_per_strategy": 4})";
  const std::string out1 = (dir.path() / "o1").string();
  const std::string out2 = (dir.path() / "o2").string();
  auto first = dpgt_cli({"--output-root", out1, "simulate", scenario.string(), "--seed", "5"});
  REQUIRE(first.code == 0);
  CHECK(first.out.find("equal vs two-tier-bads") != std::string::npos);
  REQUIRE(dpgt_cli({"--output-root", out2, "--quiet", "simulate", scenario.string(), "--seed",
                    "5"})
              .code == 0);
  CHECK(slurp(fs::path(out1) / "report.json") == slurp(fs::path(out2) / "report.json"));
  CHECK(slurp(fs::path(out1) / "report.csv") == slurp(fs::path(out2) / "report.csv"));

  std::ofstream(dir.path() / "full.json") << R"({"n_components": 10, "n_buggy": 9})";
  CHECK(dpgt_cli({"--output-root", out1, "simulate", (dir.path() / "full.json").string()}).code ==
        2);
}
