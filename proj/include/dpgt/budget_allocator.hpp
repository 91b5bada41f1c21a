#pragma once

// Turns defect probabilities into per-component test generation budgets
// using rank-driven exponential weights, optionally split into two tiers.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dpgt/defect_predictor.hpp"

namespace dpgt {

struct BadsParams {
  double e_a = 0.02393705;
  double e_b = 0.9731946;
  double e_c = -10.47408;
  double t_min = 0.0;         // seconds
  double total_budget = 0.0;  // T, seconds
  double t_dp = 0.0;          // defect prediction overhead, seconds
};

struct TierParams {
  double split_fraction = 0.5;
  double tier1_budget_fraction = 0.9;
  double t_min_tier1 = 15.0;
  double t_min_tier2 = 3.0;

  void validate() const;

  /// Floors for a per-class budget b: tier 1 gets b, tier 2 gets b/5,
  /// i.e. (15, 3) at 15 s/class and (30, 6) at 30 s/class.
  static TierParams for_per_class_budget(double per_class_seconds);
};

struct RankedScore {
  DefectScore score;
  int rank = 0;  // 1 = most likely defective
};

struct AllocationEntry {
  std::string component_id;
  double defect_probability = 0.0;
  int rank = 0;                  // global, 1-based
  double normalized_rank = 0.0;  // r' within the component's tier
  double raw_weight = 0.0;       // w'
  double weight = 0.0;           // w, sums to 1 within the tier
  int tier = 1;
  double budget_seconds = 0.0;
};

struct AllocationPlan {
  std::vector<AllocationEntry> entries;  // rank order
  double sum_allocated = 0.0;
  double total_budget = 0.0;
  double t_dp = 0.0;
  std::vector<std::string> warnings;
};

/// Sorts by probability descending; ties go to the lexicographically smaller id.
std::vector<RankedScore> assign_rank(std::vector<DefectScore> scores);

/// (rank - 1) / (n - 1), with 0 for a single component.
double normalize_rank(int rank, int n);

double exp_weight(double normalized_rank, const BadsParams& params);

AllocationPlan allocate_single_tier(const std::vector<DefectScore>& scores,
                                    const BadsParams& params);

AllocationPlan allocate_two_tier(const std::vector<DefectScore>& scores,
                                 const BadsParams& bads, const TierParams& tiers);

/// Baseline: every component receives (T - T_DP) / N.
AllocationPlan allocate_equal(const std::vector<DefectScore>& scores, const BadsParams& params);

enum class Rounding { None, WholeSeconds };

struct ScheduledRun {
  std::string component_id;
  int rank = 0;
  int tier = 1;
  double budget_seconds = 0.0;
};

/// Flattens a plan into rank order. WholeSeconds floors every budget and
/// hands the accumulated residue to the rank-1 component.
std::vector<ScheduledRun> plan_to_schedule(const AllocationPlan& plan, Rounding rounding);

void write_allocation_csv(std::ostream& out, const AllocationPlan& plan);
AllocationPlan read_allocation_csv(std::istream& in);

}  // namespace dpgt
