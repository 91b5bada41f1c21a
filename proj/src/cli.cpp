#include "dpgt/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dpgt/budget_allocator.hpp"
#include "dpgt/config.hpp"
#include "dpgt/csv.hpp"
#include "dpgt/defect_predictor.hpp"
#include "dpgt/error.hpp"
#include "dpgt/evaluation_stats.hpp"
#include "dpgt/history_miner.hpp"
#include "dpgt/orchestrator.hpp"
#include "dpgt/simulation.hpp"

namespace dpgt::cli {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::string config_path;
  std::string output_root;
  bool quiet = false;
};

struct PredictOptions {
  std::string repo;
};

struct AllocateOptions {
  std::string scores;
  std::optional<double> total_budget;
  std::optional<double> per_class_budget;
  std::optional<double> t_dp;
  std::string t_dp_file;
  std::optional<double> t_min;
  bool single_tier = false;
};

struct RunOptions {
  std::string allocation;
  int parallelism = 1;
  std::string command;
  std::optional<double> grace;
};

struct SimulateOptions {
  std::string scenario;
  std::optional<std::uint64_t> seed;
};

struct StatsOptions {
  std::string file_x;
  std::string file_y;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::DegenerateTier:
    case ErrorCode::InfeasibleScenario:
      return kExitUsage;
    case ErrorCode::BudgetInfeasible:
      return kExitInfeasible;
    default:
      return kExitInput;
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  return in;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path.string());
  out << content;
}

std::vector<double> read_numbers(const std::string& path) {
  auto in = open_input(path);
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    values.push_back(csv::to_double(line.substr(first, last - first + 1),
                                    path + ":" + std::to_string(line_no)));
  }
  return values;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int cmd_predict(const PredictOptions& opt, const ToolConfig& config, std::ostream& out,
                bool quiet) {
  const auto started = std::chrono::steady_clock::now();
  const auto commits = read_commits(opt.repo, config.mining);
  const auto histories = build_histories(commits, config.mining);
  const auto prediction =
      predict_project(histories, config.schwa, normalization_for(commits), started);

  std::ostringstream scores;
  write_scores_csv(scores, prediction.scores);
  write_file(config.output_root / "scores.csv", scores.str());
  write_file(config.output_root / "histories.json", histories_to_json(histories).dump(2) + "\n");
  const double t_dp = round_up_seconds(prediction.elapsed_seconds);
  write_file(config.output_root / "t_dp.txt", csv::fixed(t_dp, 0) + "\n");
  if (!quiet)
    out << "scored " << prediction.scores.size() << " components from " << commits.size()
        << " commits; T_DP = " << csv::fixed(t_dp, 0) << " s\n";
  return kExitOk;
}

int cmd_allocate(const AllocateOptions& opt, const ToolConfig& config, std::ostream& out,
                 std::ostream& err, bool quiet) {
  if (opt.total_budget.has_value() == opt.per_class_budget.has_value()) {
    err << "allocate: give exactly one of --total-budget or --per-class-budget\n";
    return kExitUsage;
  }
  auto in = open_input(opt.scores);
  const auto scores = read_scores_csv(in);
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, opt.scores + " lists no components");
  const auto n = static_cast<double>(scores.size());

  BadsParams bads = config.bads;
  bads.total_budget = opt.total_budget ? *opt.total_budget : *opt.per_class_budget * n;
  if (!(bads.total_budget > 0.0)) {
    err << "allocate: the total budget must be positive\n";
    return kExitUsage;
  }
  if (!opt.t_dp_file.empty()) {
    auto t_dp_in = open_input(opt.t_dp_file);
    std::string token;
    t_dp_in >> token;
    bads.t_dp = csv::to_double(token, opt.t_dp_file);
  }
  if (opt.t_dp) bads.t_dp = *opt.t_dp;
  if (opt.t_min) bads.t_min = *opt.t_min;

  AllocationPlan plan;
  if (config.tiers.enabled && !opt.single_tier) {
    const double per_class = opt.per_class_budget ? *opt.per_class_budget : bads.total_budget / n;
    plan = allocate_two_tier(scores, bads, config.tiers.resolve(per_class));
  } else {
    plan = allocate_single_tier(scores, bads);
  }
  for (const auto& w : plan.warnings) err << "warning: " << w << '\n';

  std::ostringstream csv_out;
  write_allocation_csv(csv_out, plan);
  write_file(config.output_root / "allocation.csv", csv_out.str());
  if (!quiet)
    out << "allocated " << csv::fixed(plan.sum_allocated, 4) << " s over " << plan.entries.size()
        << " components\n";
  return kExitOk;
}

int cmd_run(const RunOptions& opt, const ToolConfig& config, std::ostream& out, std::ostream& err,
            bool quiet) {
  auto in = open_input(opt.allocation);
  const auto plan = read_allocation_csv(in);
  if (plan.entries.empty()) {
    err << "run: " << opt.allocation << " contains no components\n";
    return kExitUsage;
  }
  GeneratorSpec spec = config.generator;
  if (!opt.command.empty()) spec.command_template = opt.command;
  if (opt.grace) spec.grace_seconds = *opt.grace;
  spec.output_root = config.output_root;
  if (spec.command_template.empty()) {
    err << "run: no generator command configured (generator.command_template or --command)\n";
    return kExitUsage;
  }
  spec.validate();

  const auto outcomes = run_plan(plan, spec, opt.parallelism);
  write_file(config.output_root / "runs.json", runs_to_json(outcomes).dump(2) + "\n");
  if (!quiet) {
    const auto s = summarize_runs(outcomes);
    out << "ok=" << s.ok << " nonzero=" << s.nonzero << " timed_out=" << s.timed_out
        << " spawn_failed=" << s.spawn_failed << " wall=" << csv::fixed(s.total_wall_seconds, 2)
        << "s\n";
  }
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& opt, const ToolConfig& config, std::ostream& out,
                 bool quiet) {
  auto in = open_input(opt.scenario);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, opt.scenario + " is not valid JSON: " + e.what());
  }
  auto scenario = scenario_from_json(doc);
  if (opt.seed) scenario.seed = *opt.seed;

  const auto report = compare_strategies(scenario);
  write_file(config.output_root / "report.json", report_to_json(report).dump(2) + "\n");
  std::ostringstream csv_out;
  write_report_csv(csv_out, report);
  write_file(config.output_root / "report.csv", csv_out.str());
  if (!quiet) {
    for (const auto& s : report.strategies)
      out << to_string(s.strategy) << ": mean=" << format_number(s.mean_bugs_found)
          << " median=" << format_number(s.median_bugs_found) << '\n';
    for (const auto& c : report.comparisons)
      out << to_string(report.strategies[c.first].strategy) << " vs "
          << to_string(report.strategies[c.second].strategy)
          << ": p=" << format_number(c.stats.p_value_two_tailed)
          << " a12=" << format_number(c.stats.a12) << " unique=" << c.unique_to_first.size()
          << "/" << c.unique_to_second.size() << '\n';
  }
  return kExitOk;
}

int cmd_stats(const StatsOptions& opt, std::ostream& out) {
  const auto x = read_numbers(opt.file_x);
  const auto y = read_numbers(opt.file_y);
  const auto result = mann_whitney_u_two_tailed(x, y);
  out << "u=" << format_number(result.u_statistic) << '\n'
      << "p_two_tailed=" << format_number(result.p_value_two_tailed) << '\n'
      << "a12=" << format_number(result.a12) << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Defect-prediction guided test budget allocation", "dpgt"};
  app.set_version_flag("--version", std::string("dpgt ") + kVersion);
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "JSON configuration file");
  app.add_option("--output-root", global.output_root, "Directory for all outputs");
  app.add_flag("--quiet", global.quiet, "Suppress progress output");

  PredictOptions predict;
  auto* predict_cmd = app.add_subcommand("predict", "Mine a git repository and score components");
  predict_cmd->add_option("repo", predict.repo, "Repository path")->required();

  AllocateOptions allocate;
  auto* allocate_cmd = app.add_subcommand("allocate", "Turn scores.csv into allocation.csv");
  allocate_cmd->add_option("scores", allocate.scores, "scores.csv")->required();
  auto* total_opt =
      allocate_cmd->add_option("--total-budget", allocate.total_budget, "Total budget T (s)");
  auto* per_class_opt = allocate_cmd->add_option("--per-class-budget", allocate.per_class_budget,
                                                 "Budget per component b (s); T = b * N");
  total_opt->excludes(per_class_opt);
  allocate_cmd->add_option("--t-dp", allocate.t_dp, "Defect prediction overhead (s)");
  allocate_cmd->add_option("--t-dp-file", allocate.t_dp_file, "Read the overhead from t_dp.txt");
  allocate_cmd->add_option("--t-min", allocate.t_min, "Single-tier minimum budget (s)");
  allocate_cmd->add_flag("--single-tier", allocate.single_tier, "Disable the two-tier split");

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Run the generator under allocation.csv");
  run_cmd->add_option("allocation", run_opts.allocation, "allocation.csv")->required();
  run_cmd->add_option("--parallelism", run_opts.parallelism, "Concurrent generator processes")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--command", run_opts.command, "Generator command template");
  run_cmd->add_option("--grace", run_opts.grace, "Seconds allowed beyond each budget")
      ->check(CLI::NonNegativeNumber);

  SimulateOptions simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Compare strategies on synthetic projects");
  simulate_cmd->add_option("scenario", simulate.scenario, "scenario.json")->required();
  simulate_cmd->add_option("--seed", simulate.seed, "Override the scenario seed");

  StatsOptions stats;
  auto* stats_cmd = app.add_subcommand("stats", "Mann-Whitney U and A12 for two samples");
  stats_cmd->add_option("file_x", stats.file_x, "One number per line")->required();
  stats_cmd->add_option("file_y", stats.file_y, "One number per line")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    ToolConfig config = global.config_path.empty() ? ToolConfig{} : load_config(global.config_path);
    if (!global.output_root.empty()) config.output_root = global.output_root;
    config.generator.output_root = config.output_root;

    if (*predict_cmd) return cmd_predict(predict, config, out, global.quiet);
    if (*allocate_cmd) return cmd_allocate(allocate, config, out, err, global.quiet);
    if (*run_cmd) return cmd_run(run_opts, config, out, err, global.quiet);
    if (*simulate_cmd) return cmd_simulate(simulate, config, out, global.quiet);
    if (*stats_cmd) return cmd_stats(stats, out);
  } catch (const BudgetInfeasibleError& e) {
    err << "error: infeasible budget: " << e.what() << " (shortfall "
        << csv::fixed(e.shortfall(), 4) << " s)\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}

}  // namespace dpgt::cli
