#include "dpgt/budget_allocator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "dpgt/csv.hpp"
#include "dpgt/error.hpp"

namespace dpgt {

namespace {

// Discretionary budgets this far below zero are rounding noise, not shortfalls.
constexpr double kFeasibilitySlack = 1e-9;

std::string seconds(double v) { return csv::fixed(v, 4) + " s"; }

double checked_remaining(double remaining, const std::string& context) {
  if (remaining < -kFeasibilitySlack)
    throw BudgetInfeasibleError(-remaining, context + ": budget short by " + seconds(-remaining));
  return std::max(0.0, remaining);
}

// Exponential allocation over a contiguous, rank-ordered slice of components.
// Ranks are renormalized within the slice.
std::vector<AllocationEntry> allocate_exponential(std::span<const RankedScore> members,
                                                  double budget, double t_min, double t_dp,
                                                  const BadsParams& params, int tier,
                                                  const std::string& context) {
  const int n = static_cast<int>(members.size());
  const double remaining =
      checked_remaining(budget - n * t_min - t_dp, context);

  std::vector<AllocationEntry> entries(members.size());
  double weight_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    auto& e = entries[i];
    e.component_id = members[i].score.component_id;
    e.defect_probability = members[i].score.probability;
    e.rank = members[i].rank;
    e.tier = tier;
    e.normalized_rank = normalize_rank(i + 1, n);
    e.raw_weight = exp_weight(e.normalized_rank, params);
    weight_sum += e.raw_weight;
  }
  for (auto& e : entries) {
    e.weight = e.raw_weight / weight_sum;
    e.budget_seconds = e.weight * remaining + t_min;
  }
  return entries;
}

void finish(AllocationPlan& plan) {
  plan.sum_allocated = 0.0;
  for (const auto& e : plan.entries) plan.sum_allocated += e.budget_seconds;
}

}  // namespace

void TierParams::validate() const {
  if (!(split_fraction > 0.0 && split_fraction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "tiers.split_fraction must lie in (0,1)");
  if (!(tier1_budget_fraction > 0.0 && tier1_budget_fraction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "tiers.tier1_budget_fraction must lie in (0,1)");
  if (!(t_min_tier1 >= 0.0) || !(t_min_tier2 >= 0.0))
    throw Error(ErrorCode::InvalidConfig, "tier minimum budgets must be >= 0");
}

TierParams TierParams::for_per_class_budget(double per_class_seconds) {
  TierParams p;
  p.t_min_tier1 = per_class_seconds;
  p.t_min_tier2 = per_class_seconds / 5.0;
  return p;
}

std::vector<RankedScore> assign_rank(std::vector<DefectScore> scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "cannot rank an empty score list");
  sort_scores(scores);
  std::vector<RankedScore> ranked;
  ranked.reserve(scores.size());
  int rank = 1;
  for (auto& s : scores) ranked.push_back({std::move(s), rank++});
  return ranked;
}

double normalize_rank(int rank, int n) {
  if (n < 1 || rank < 1 || rank > n)
    throw Error(ErrorCode::RankOutOfRange,
                "rank " + std::to_string(rank) + " outside 1.." + std::to_string(n));
  if (n == 1) return 0.0;
  return static_cast<double>(rank - 1) / static_cast<double>(n - 1);
}

double exp_weight(double normalized_rank, const BadsParams& params) {
  return params.e_a + params.e_b * std::exp(params.e_c * normalized_rank);
}

AllocationPlan allocate_single_tier(const std::vector<DefectScore>& scores,
                                    const BadsParams& params) {
  auto ranked = assign_rank(scores);
  AllocationPlan plan;
  plan.total_budget = params.total_budget;
  plan.t_dp = params.t_dp;
  plan.entries = allocate_exponential(ranked, params.total_budget, params.t_min, params.t_dp,
                                      params, 1, "single-tier allocation");
  finish(plan);
  return plan;
}

AllocationPlan allocate_two_tier(const std::vector<DefectScore>& scores, const BadsParams& bads,
                                 const TierParams& tiers) {
  tiers.validate();
  auto ranked = assign_rank(scores);
  const int n = static_cast<int>(ranked.size());
  // The small slack keeps e.g. 0.3 * 10 from rounding up to 4.
  const int n1 = std::min(n, static_cast<int>(std::ceil(tiers.split_fraction * n - 1e-9)));
  const int n2 = n - n1;
  if (n >= 2 && (n1 == 0 || n2 == 0))
    throw Error(ErrorCode::DegenerateTier, "tier split leaves an empty tier (N1=" +
                                               std::to_string(n1) + ", N2=" +
                                               std::to_string(n2) + ")");

  AllocationPlan plan;
  plan.total_budget = bads.total_budget;
  plan.t_dp = bads.t_dp;

  const double effective =
      checked_remaining(bads.total_budget - bads.t_dp, "two-tier allocation");
  const double tier1_budget = n2 == 0 ? effective : tiers.tier1_budget_fraction * effective;
  const double tier2_budget = effective - tier1_budget;

  std::span<const RankedScore> all(ranked);
  plan.entries = allocate_exponential(all.first(n1), tier1_budget, tiers.t_min_tier1, 0.0, bads,
                                      1, "tier 1");

  if (n2 > 0) {
    const double each = tier2_budget / n2;
    if (each < tiers.t_min_tier2)
      plan.warnings.push_back("tier 2 budget " + seconds(each) + " per component is below " +
                              "t_min_tier2 = " + seconds(tiers.t_min_tier2));
    for (int i = 0; i < n2; ++i) {
      const auto& member = ranked[n1 + i];
      AllocationEntry e;
      e.component_id = member.score.component_id;
      e.defect_probability = member.score.probability;
      e.rank = member.rank;
      e.tier = 2;
      e.normalized_rank = normalize_rank(i + 1, n2);
      e.raw_weight = 1.0;
      e.weight = 1.0 / n2;
      e.budget_seconds = each;
      plan.entries.push_back(std::move(e));
    }
  }
  finish(plan);
  return plan;
}

AllocationPlan allocate_equal(const std::vector<DefectScore>& scores, const BadsParams& params) {
  auto ranked = assign_rank(scores);
  const int n = static_cast<int>(ranked.size());
  const double effective =
      checked_remaining(params.total_budget - params.t_dp, "equal allocation");
  AllocationPlan plan;
  plan.total_budget = params.total_budget;
  plan.t_dp = params.t_dp;
  for (const auto& member : ranked) {
    AllocationEntry e;
    e.component_id = member.score.component_id;
    e.defect_probability = member.score.probability;
    e.rank = member.rank;
    e.normalized_rank = normalize_rank(member.rank, n);
    e.raw_weight = 1.0;
    e.weight = 1.0 / n;
    e.budget_seconds = effective / n;
    plan.entries.push_back(std::move(e));
  }
  finish(plan);
  return plan;
}

std::vector<ScheduledRun> plan_to_schedule(const AllocationPlan& plan, Rounding rounding) {
  std::vector<ScheduledRun> schedule;
  schedule.reserve(plan.entries.size());
  for (const auto& e : plan.entries)
    schedule.push_back({e.component_id, e.rank, e.tier, e.budget_seconds});
  std::stable_sort(schedule.begin(), schedule.end(),
                   [](const ScheduledRun& a, const ScheduledRun& b) { return a.rank < b.rank; });
  if (rounding == Rounding::None || schedule.size() < 2) return schedule;

  double residue = 0.0;
  for (auto& run : schedule) {
    const double floored = std::floor(run.budget_seconds);
    residue += run.budget_seconds - floored;
    run.budget_seconds = floored;
  }
  schedule.front().budget_seconds += residue;
  return schedule;
}

void write_allocation_csv(std::ostream& out, const AllocationPlan& plan) {
  out << "component,probability,rank,normalized_rank,tier,weight,budget_seconds\n";
  for (const auto& e : plan.entries) {
    out << csv::join({e.component_id, csv::fixed(e.defect_probability, 6), std::to_string(e.rank),
                      csv::fixed(e.normalized_rank, 6), std::to_string(e.tier),
                      csv::fixed(e.weight, 9), csv::fixed(e.budget_seconds, 4)})
        << '\n';
  }
}

AllocationPlan read_allocation_csv(std::istream& in) {
  auto rows = csv::parse(in);
  const csv::Row header{"component", "probability", "rank",          "normalized_rank",
                        "tier",      "weight",      "budget_seconds"};
  if (rows.empty() || rows.front() != header)
    throw Error(ErrorCode::InvalidInput, "allocation.csv: missing or unexpected header");
  AllocationPlan plan;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != header.size())
      throw Error(ErrorCode::InvalidInput,
                  "allocation.csv: row " + std::to_string(i + 1) + " has wrong column count");
    AllocationEntry e;
    e.component_id = row[0];
    e.defect_probability = csv::to_double(row[1], "probability");
    e.rank = static_cast<int>(csv::to_integer(row[2], "rank"));
    e.normalized_rank = csv::to_double(row[3], "normalized_rank");
    e.tier = static_cast<int>(csv::to_integer(row[4], "tier"));
    e.weight = csv::to_double(row[5], "weight");
    e.raw_weight = e.weight;
    e.budget_seconds = csv::to_double(row[6], "budget_seconds");
    if (e.budget_seconds < 0.0 || (e.tier != 1 && e.tier != 2))
      throw Error(ErrorCode::InvalidInput,
                  "allocation.csv: invalid tier or budget on row " + std::to_string(i + 1));
    plan.entries.push_back(std::move(e));
  }
  std::stable_sort(plan.entries.begin(), plan.entries.end(),
                   [](const AllocationEntry& a, const AllocationEntry& b) { return a.rank < b.rank; });
  finish(plan);
  plan.total_budget = plan.sum_allocated;
  return plan;
}

}  // namespace dpgt
