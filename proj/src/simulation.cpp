#include "dpgt/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include "dpgt/error.hpp"

namespace dpgt {

namespace {

constexpr std::uint64_t kProjectStream = 0x70726f6a;    // "proj"
constexpr std::uint64_t kDetectionStream = 0x64657463;  // "detc"

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Largest-remainder split of `total` over `shares`; ties go to the earlier band.
std::array<int, 3> apportion(int total, const std::array<double, 3>& shares) {
  std::array<int, 3> counts{};
  std::array<double, 3> remainders{};
  int assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = shares[i] * total;
    counts[i] = static_cast<int>(std::floor(quota + 1e-9));
    remainders[i] = quota - counts[i];
    assigned += counts[i];
  }
  while (assigned < total) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i)
      if (remainders[i] > remainders[best] + 1e-12) best = i;
    ++counts[best];
    remainders[best] = -1.0;
    ++assigned;
  }
  return counts;
}

std::string component_name(int index, int n) {
  const auto width = std::to_string(std::max(0, n - 1)).size();
  std::string digits = std::to_string(index);
  return "C" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

double default_single_tier_t_min(const SimulationScenario& s) {
  return s.single_tier_t_min.value_or(s.budget_per_class / 5.0);
}

void check_conservation(const AllocationPlan& plan, Strategy strategy) {
  const double expected = plan.total_budget - plan.t_dp;
  if (std::abs(plan.sum_allocated - expected) > 1e-6)
    throw Error(ErrorCode::PlanMismatch, std::string(to_string(strategy)) +
                                             " plan does not conserve the budget");
}

}  // namespace

double detection_probability(double budget_seconds, double p_max, double tau) {
  if (budget_seconds <= 0.0) return 0.0;
  return p_max * -std::expm1(-budget_seconds / tau);
}

const char* to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::Equal: return "equal";
    case Strategy::SingleTierBads: return "single-tier-bads";
    case Strategy::TwoTierBads: return "two-tier-bads";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& name) {
  for (auto s : {Strategy::Equal, Strategy::SingleTierBads, Strategy::TwoTierBads})
    if (name == to_string(s)) return s;
  throw Error(ErrorCode::InvalidConfig, "unknown strategy '" + name + "'");
}

void SimulationScenario::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (n_components < 1) fail("n_components must be >= 1");
  if (n_buggy < 1 || n_buggy > n_components) fail("n_buggy must lie in 1..n_components");
  if (runs_per_strategy < 1) fail("runs_per_strategy must be >= 1");
  if (!(budget_per_class > 0.0)) fail("budget_per_class must be > 0");
  if (!(t_dp >= 0.0)) fail("t_dp must be >= 0");
  if (single_tier_t_min && !(*single_tier_t_min >= 0.0)) fail("single_tier_t_min must be >= 0");
  const auto& p = predictor;
  if (!(p.top_decile_probability >= 0.0 && p.top_decile_probability <= 1.0) ||
      !(p.mid_band_probability >= 0.0 && p.mid_band_probability <= 1.0) ||
      p.top_decile_probability + p.mid_band_probability > 1.0 + 1e-12)
    fail("predictor band probabilities must lie in [0,1] and sum to at most 1");
  const auto& d = detection;
  if (!(d.p_max >= 0.0 && d.p_max <= 1.0)) fail("detection.p_max must lie in [0,1]");
  if (!(d.tau > 0.0)) fail("detection.tau must be > 0");
  if (!(d.p_max_jitter >= 0.0) || !(d.tau_log_sigma >= 0.0))
    fail("detection jitter parameters must be >= 0");
  if (strategies.empty()) fail("at least one strategy is required");
}

nlohmann::json scenario_to_json(const SimulationScenario& s) {
  nlohmann::json strategies = nlohmann::json::array();
  for (auto st : s.strategies) strategies.push_back(to_string(st));
  nlohmann::json doc = {
      {"n_components", s.n_components},
      {"n_buggy", s.n_buggy},
      {"runs_per_strategy", s.runs_per_strategy},
      {"budget_per_class", s.budget_per_class},
      {"t_dp", s.t_dp},
      {"single_tier_t_min", default_single_tier_t_min(s)},
      {"predictor",
       {{"mode", "rank-placement"},
        {"top_decile_probability", s.predictor.top_decile_probability},
        {"mid_band_probability", s.predictor.mid_band_probability}}},
      {"detection",
       {{"p_max", s.detection.p_max},
        {"tau", s.detection.tau},
        {"p_max_jitter", s.detection.p_max_jitter},
        {"tau_log_sigma", s.detection.tau_log_sigma}}},
      {"seed", s.seed},
      {"strategies", strategies}};
  return doc;
}

SimulationScenario scenario_from_json(const nlohmann::json& doc) {
  SimulationScenario s;
  auto reject_unknown = [](const nlohmann::json& obj, std::initializer_list<const char*> keys,
                           const std::string& where) {
    if (!obj.is_object()) throw Error(ErrorCode::InvalidConfig, where + ": expected an object");
    for (const auto& [key, _] : obj.items())
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
        throw Error(ErrorCode::InvalidConfig, where + ": unknown key '" + key + "'");
  };
  try {
    reject_unknown(doc,
                   {"n_components", "n_buggy", "runs_per_strategy", "budget_per_class", "t_dp",
                    "single_tier_t_min", "predictor", "detection", "seed", "strategies"},
                   "scenario");
    auto get = [&](const nlohmann::json& obj, const char* key, auto& out) {
      if (obj.contains(key)) out = obj.at(key).get<std::decay_t<decltype(out)>>();
    };
    get(doc, "n_components", s.n_components);
    get(doc, "n_buggy", s.n_buggy);
    get(doc, "runs_per_strategy", s.runs_per_strategy);
    get(doc, "budget_per_class", s.budget_per_class);
    get(doc, "t_dp", s.t_dp);
    get(doc, "seed", s.seed);
    if (doc.contains("single_tier_t_min")) s.single_tier_t_min = doc["single_tier_t_min"].get<double>();
    if (doc.contains("predictor")) {
      const auto& p = doc["predictor"];
      reject_unknown(p, {"mode", "top_decile_probability", "mid_band_probability"},
                     "scenario.predictor");
      if (p.contains("mode") && p["mode"].get<std::string>() != "rank-placement")
        throw Error(ErrorCode::InvalidConfig, "scenario.predictor.mode must be rank-placement");
      get(p, "top_decile_probability", s.predictor.top_decile_probability);
      get(p, "mid_band_probability", s.predictor.mid_band_probability);
    }
    if (doc.contains("detection")) {
      const auto& d = doc["detection"];
      reject_unknown(d, {"p_max", "tau", "p_max_jitter", "tau_log_sigma"}, "scenario.detection");
      get(d, "p_max", s.detection.p_max);
      get(d, "tau", s.detection.tau);
      get(d, "p_max_jitter", s.detection.p_max_jitter);
      get(d, "tau_log_sigma", s.detection.tau_log_sigma);
    }
    if (doc.contains("strategies")) {
      s.strategies.clear();
      for (const auto& name : doc["strategies"]) s.strategies.push_back(strategy_from_string(name));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b)
    : key_(splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ a) ^ b)) {}

std::uint64_t CounterRng::next() { return splitmix64(key_ + 0x632be59bd9b4e019ULL * ++counter_); }

double CounterRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t CounterRng::below(std::uint64_t bound) {
  // Rejection keeps the modulo unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

double CounterRng::standard_normal() {
  // Box-Muller; 1 - uniform() keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SyntheticProject generate_project(const SimulationScenario& scenario, std::uint64_t seed) {
  scenario.validate();
  const int n = scenario.n_components;
  const int top_slots = n / 10;
  const int mid_slots = n / 2 - top_slots;
  const int tail_slots = n - top_slots - mid_slots;
  const auto& p = scenario.predictor;
  const auto counts = apportion(
      scenario.n_buggy, {p.top_decile_probability, p.mid_band_probability, p.tail_probability()});
  const std::array<int, 3> capacity{top_slots, mid_slots, tail_slots};
  const std::array<const char*, 3> band_names{"top 10%", "10-50%", "bottom 50%"};
  for (std::size_t b = 0; b < 3; ++b)
    if (counts[b] > capacity[b])
      throw Error(ErrorCode::InfeasibleScenario,
                  std::to_string(counts[b]) + " buggy components do not fit the " +
                      std::to_string(capacity[b]) + " slots of the " + band_names[b] + " band");

  CounterRng rng(seed, kProjectStream);
  auto shuffle = [&](std::vector<int>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
  };

  // Rank slots (0-based) taken by buggy components, band by band.
  std::vector<int> buggy_slots;
  int band_start = 0;
  for (std::size_t b = 0; b < 3; ++b) {
    std::vector<int> band(capacity[b]);
    for (int i = 0; i < capacity[b]; ++i) band[i] = band_start + i;
    shuffle(band);
    buggy_slots.insert(buggy_slots.end(), band.begin(), band.begin() + counts[b]);
    band_start += capacity[b];
  }

  // Which components are buggy, and which free slot each clean one gets.
  std::vector<int> components(n);
  for (int i = 0; i < n; ++i) components[i] = i;
  shuffle(components);
  std::vector<bool> slot_taken(n, false);
  for (int s : buggy_slots) slot_taken[s] = true;
  std::vector<int> free_slots;
  for (int s = 0; s < n; ++s)
    if (!slot_taken[s]) free_slots.push_back(s);
  shuffle(free_slots);

  std::vector<int> slot_of(n);
  for (std::size_t i = 0; i < buggy_slots.size(); ++i) slot_of[components[i]] = buggy_slots[i];
  for (std::size_t i = buggy_slots.size(); i < components.size(); ++i)
    slot_of[components[i]] = free_slots[i - buggy_slots.size()];

  SyntheticProject project;
  project.scores.reserve(n);
  for (int c = 0; c < n; ++c) {
    DefectScore s;
    s.component_id = component_name(c, n);
    // Strictly decreasing in slot, so ranking reproduces the placement.
    s.probability = 1.0 - (slot_of[c] + 0.5) / n;
    s.score = -std::log1p(-s.probability);
    project.scores.push_back(std::move(s));
  }

  const auto& d = scenario.detection;
  for (std::size_t i = 0; i < buggy_slots.size(); ++i) {
    BuggyClass bug;
    bug.component_id = component_name(components[i], n);
    bug.rank = slot_of[components[i]] + 1;
    project.buggy.push_back(std::move(bug));
  }
  std::sort(project.buggy.begin(), project.buggy.end(),
            [](const BuggyClass& a, const BuggyClass& b) { return a.rank < b.rank; });
  for (auto& bug : project.buggy) {
    bug.p_max = std::clamp(d.p_max + d.p_max_jitter * (2.0 * rng.uniform() - 1.0), 0.0, 1.0);
    bug.tau = d.tau * std::exp(d.tau_log_sigma * rng.standard_normal());
  }
  return project;
}

DetectionMatrix simulate_strategy(const SyntheticProject& project, const AllocationPlan& plan,
                                  int runs, std::uint64_t seed, std::string strategy_id) {
  if (runs < 1) throw Error(ErrorCode::InvalidInput, "runs must be >= 1");
  std::map<std::string, double> budget_of;
  for (const auto& e : plan.entries) budget_of[e.component_id] = e.budget_seconds;
  if (plan.entries.size() != project.scores.size())
    throw Error(ErrorCode::PlanMismatch, "plan does not cover the project's components");

  std::vector<double> p(project.buggy.size());
  for (std::size_t j = 0; j < project.buggy.size(); ++j) {
    const auto& bug = project.buggy[j];
    auto it = budget_of.find(bug.component_id);
    if (it == budget_of.end())
      throw Error(ErrorCode::PlanMismatch, "plan has no budget for " + bug.component_id);
    p[j] = detection_probability(it->second, bug.p_max, bug.tau);
  }

  DetectionMatrix matrix(std::move(strategy_id), static_cast<std::size_t>(runs),
                         project.buggy.size());
  for (int r = 0; r < runs; ++r)
    for (std::size_t j = 0; j < p.size(); ++j) {
      CounterRng draw(seed, kDetectionStream, static_cast<std::uint64_t>(r), j);
      matrix.set(static_cast<std::size_t>(r), j, draw.uniform() < p[j]);
    }
  return matrix;
}

AllocationPlan plan_for_strategy(const SyntheticProject& project,
                                 const SimulationScenario& scenario, Strategy strategy) {
  BadsParams bads;
  bads.total_budget = scenario.budget_per_class * static_cast<double>(project.scores.size());
  bads.t_dp = scenario.t_dp;
  AllocationPlan plan;
  switch (strategy) {
    case Strategy::Equal:
      plan = allocate_equal(project.scores, bads);
      break;
    case Strategy::SingleTierBads:
      bads.t_min = default_single_tier_t_min(scenario);
      plan = allocate_single_tier(project.scores, bads);
      break;
    case Strategy::TwoTierBads:
      plan = allocate_two_tier(project.scores, bads,
                               TierParams::for_per_class_budget(scenario.budget_per_class));
      break;
  }
  check_conservation(plan, strategy);
  return plan;
}

ComparisonReport compare_strategies(const SimulationScenario& scenario) {
  return compare_strategies(scenario, scenario.strategies);
}

ComparisonReport compare_strategies(const SimulationScenario& scenario,
                                    const std::vector<Strategy>& strategies) {
  scenario.validate();
  if (strategies.empty()) throw Error(ErrorCode::InvalidConfig, "no strategies to compare");
  ComparisonReport report;
  report.scenario = scenario;
  report.scenario.strategies = strategies;
  const auto project = generate_project(scenario, scenario.seed);
  const std::size_t n_bugs = project.buggy.size();

  for (auto strategy : strategies) {
    const auto plan = plan_for_strategy(project, scenario, strategy);
    StrategyResult result;
    result.strategy = strategy;
    result.matrix = simulate_strategy(project, plan, scenario.runs_per_strategy, scenario.seed,
                                      to_string(strategy));
    result.bugs_found = bugs_found_per_run(result.matrix);
    std::vector<double> found(result.bugs_found.begin(), result.bugs_found.end());
    result.mean_bugs_found = mean(found);
    result.median_bugs_found = median(found);
    std::map<std::string, double> budget_of;
    for (const auto& e : plan.entries) budget_of[e.component_id] = e.budget_seconds;
    for (std::size_t j = 0; j < n_bugs; ++j) {
      result.success_rates.push_back(success_rate(result.matrix, j));
      result.buggy_budgets.push_back(budget_of.at(project.buggy[j].component_id));
    }
    report.strategies.push_back(std::move(result));
  }

  for (std::size_t i = 0; i < report.strategies.size(); ++i)
    for (std::size_t j = i + 1; j < report.strategies.size(); ++j) {
      const auto& a = report.strategies[i];
      const auto& b = report.strategies[j];
      std::vector<double> xa(a.bugs_found.begin(), a.bugs_found.end());
      std::vector<double> xb(b.bugs_found.begin(), b.bugs_found.end());
      PairwiseComparison cmp;
      cmp.first = i;
      cmp.second = j;
      cmp.stats = mann_whitney_u_two_tailed(xa, xb);
      std::tie(cmp.unique_to_first, cmp.unique_to_second) = unique_bugs(a.matrix, b.matrix);
      report.comparisons.push_back(std::move(cmp));
    }

  const int n = scenario.n_components;
  for (int band = 0; band < 10; ++band) {
    RankBand rb;
    rb.lower_percent = band * 10;
    rb.upper_percent = band * 10 + 10;
    rb.mean_budget.assign(report.strategies.size(), 0.0);
    rb.mean_found_per_run.assign(report.strategies.size(), 0.0);
    for (std::size_t j = 0; j < n_bugs; ++j) {
      const double position = normalize_rank(project.buggy[j].rank, n);
      if (std::min(9, static_cast<int>(position * 10.0)) != band) continue;
      ++rb.n_buggy;
      for (std::size_t s = 0; s < report.strategies.size(); ++s) {
        rb.mean_budget[s] += report.strategies[s].buggy_budgets[j];
        rb.mean_found_per_run[s] += report.strategies[s].success_rates[j];
      }
    }
    if (rb.n_buggy > 0)
      for (auto& v : rb.mean_budget) v /= rb.n_buggy;
    report.bands.push_back(std::move(rb));
  }

  std::map<std::string, double> probability_of;
  for (const auto& s : project.scores) probability_of[s.component_id] = s.probability;
  int recalled = 0;
  for (const auto& bug : project.buggy) recalled += probability_of[bug.component_id] >= 0.5;
  report.predictor_recall = static_cast<double>(recalled) / static_cast<double>(n_bugs);
  return report;
}

nlohmann::json report_to_json(const ComparisonReport& report) {
  nlohmann::json strategies = nlohmann::json::array();
  for (const auto& s : report.strategies) {
    strategies.push_back({{"strategy", to_string(s.strategy)},
                          {"bugs_found", s.bugs_found},
                          {"mean", s.mean_bugs_found},
                          {"median", s.median_bugs_found},
                          {"success_rates", s.success_rates},
                          {"buggy_budgets", s.buggy_budgets}});
  }
  nlohmann::json comparisons = nlohmann::json::array();
  for (const auto& c : report.comparisons) {
    comparisons.push_back(
        {{"first", to_string(report.strategies[c.first].strategy)},
         {"second", to_string(report.strategies[c.second].strategy)},
         {"u", c.stats.u_statistic},
         {"p_two_tailed", c.stats.p_value_two_tailed},
         {"a12", c.stats.a12},
         {"p_method", c.stats.method == PValueMethod::Exact ? "exact" : "normal"},
         {"degenerate_variance", c.stats.degenerate_variance},
         {"unique_to_first", c.unique_to_first},
         {"unique_to_second", c.unique_to_second}});
  }
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& b : report.bands) {
    bands.push_back({{"rank_percent", {b.lower_percent, b.upper_percent}},
                     {"n_buggy", b.n_buggy},
                     {"mean_budget", b.mean_budget},
                     {"mean_found_per_run", b.mean_found_per_run}});
  }
  return {{"scenario", scenario_to_json(report.scenario)},
          {"strategies", strategies},
          {"comparisons", comparisons},
          {"rank_bands", bands},
          {"predictor_recall", report.predictor_recall}};
}

void write_report_csv(std::ostream& out, const ComparisonReport& report) {
  out << "strategy,run,bugs_found\n";
  for (const auto& s : report.strategies)
    for (std::size_t r = 0; r < s.bugs_found.size(); ++r)
      out << to_string(s.strategy) << ',' << r << ',' << s.bugs_found[r] << '\n';
}

}  // namespace dpgt
