#pragma once

// Seeded Monte-Carlo comparison of budget allocation strategies on synthetic
// projects whose buggy components are placed into predictor rank bands.

#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpgt/budget_allocator.hpp"
#include "dpgt/evaluation_stats.hpp"

namespace dpgt {

/// Places buggy components into predictor rank bands: top 10%, 10-50%, and
/// the bottom half takes the remaining mass.
struct ScoreGenerator {
  double top_decile_probability = 0.52;
  double mid_band_probability = 0.36;

  double tail_probability() const { return 1.0 - top_decile_probability - mid_band_probability; }
};

/// p(t) = p_max * (1 - exp(-t / tau)). Each buggy class draws its own p_max
/// uniformly from p_max +/- p_max_jitter (clipped to [0,1]) and its own tau as
/// tau * exp(tau_log_sigma * z), z standard normal.
struct DetectionCurve {
  double p_max = 0.8;
  double tau = 120.0;
  double p_max_jitter = 0.2;
  double tau_log_sigma = 1.5;
};

double detection_probability(double budget_seconds, double p_max, double tau);

enum class Strategy { Equal, SingleTierBads, TwoTierBads };

const char* to_string(Strategy s) noexcept;
Strategy strategy_from_string(const std::string& name);

struct SimulationScenario {
  int n_components = 300;
  int n_buggy = 50;
  int runs_per_strategy = 20;
  double budget_per_class = 15.0;
  double t_dp = 0.0;
  /// Floor for single-tier BADS; defaults to budget_per_class / 5.
  std::optional<double> single_tier_t_min;
  ScoreGenerator predictor;
  DetectionCurve detection;
  std::uint64_t seed = 1;
  std::vector<Strategy> strategies{Strategy::Equal, Strategy::SingleTierBads,
                                   Strategy::TwoTierBads};

  void validate() const;
};

nlohmann::json scenario_to_json(const SimulationScenario& scenario);
/// Missing keys keep their defaults; unknown keys are rejected.
SimulationScenario scenario_from_json(const nlohmann::json& doc);

/// Counter-based generator: every (seed, stream, a, b) tuple names an
/// independent sequence, so draws never depend on evaluation order.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t a = 0, std::uint64_t b = 0);

  std::uint64_t next();
  std::uint64_t operator()() { return next(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double standard_normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct BuggyClass {
  std::string component_id;
  int rank = 0;  // 1-based position in the predictor ranking
  double p_max = 0.0;
  double tau = 0.0;
};

struct SyntheticProject {
  std::vector<DefectScore> scores;  // one per component, any order
  std::vector<BuggyClass> buggy;    // sorted by rank
};

SyntheticProject generate_project(const SimulationScenario& scenario, std::uint64_t seed);

/// runs x buggy detection outcomes. The uniform draw for (run, bug) comes from
/// its own substream, so strategies evaluated with the same seed share draws.
DetectionMatrix simulate_strategy(const SyntheticProject& project, const AllocationPlan& plan,
                                  int runs, std::uint64_t seed, std::string strategy_id = {});

AllocationPlan plan_for_strategy(const SyntheticProject& project,
                                 const SimulationScenario& scenario, Strategy strategy);

struct StrategyResult {
  Strategy strategy = Strategy::Equal;
  DetectionMatrix matrix;
  std::vector<int> bugs_found;  // per run
  double mean_bugs_found = 0.0;
  double median_bugs_found = 0.0;
  std::vector<double> success_rates;    // per buggy class
  std::vector<double> buggy_budgets;    // seconds per buggy class
};

struct PairwiseComparison {
  std::size_t first = 0;   // index into ComparisonReport::strategies
  std::size_t second = 0;
  EffectSizeResult stats;  // first vs second over bugs found per run
  std::set<std::size_t> unique_to_first;
  std::set<std::size_t> unique_to_second;
};

/// Buggy classes grouped by relative rank position, in tenths.
struct RankBand {
  int lower_percent = 0;
  int upper_percent = 10;
  int n_buggy = 0;
  std::vector<double> mean_budget;       // per strategy
  std::vector<double> mean_found_per_run;  // per strategy
};

struct ComparisonReport {
  SimulationScenario scenario;
  std::vector<StrategyResult> strategies;
  std::vector<PairwiseComparison> comparisons;  // all i < j
  std::vector<RankBand> bands;
  double predictor_recall = 0.0;  // buggy classes with probability >= 0.5
};

ComparisonReport compare_strategies(const SimulationScenario& scenario,
                                    const std::vector<Strategy>& strategies);
ComparisonReport compare_strategies(const SimulationScenario& scenario);

nlohmann::json report_to_json(const ComparisonReport& report);
void write_report_csv(std::ostream& out, const ComparisonReport& report);

}  // namespace dpgt
