#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "dpgt/error.hpp"
#include "dpgt/simulation.hpp"

using namespace dpgt;

namespace {

SimulationScenario small_scenario() {
  SimulationScenario s;
  s.n_components = 60;
  s.n_buggy = 10;
  s.runs_per_strategy = 5;
  return s;
}

}  // namespace

TEST_CASE("detection_probability") {
  CHECK(detection_probability(0.0, 0.9, 30.0) == 0.0);
  CHECK(detection_probability(30.0, 1.0, 30.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  double prev = 0.0;
  for (int t = 1; t < 200; ++t) {
    double p = detection_probability(t, 0.8, 20.0);
    CHECK(p > prev);
    CHECK(p < 0.8);
    prev = p;
  }
}

TEST_CASE("CounterRng is keyed and bounded") {
  CounterRng a(1, 2, 3, 4), b(1, 2, 3, 4), c(1, 2, 3, 5);
  CHECK(a.next() == b.next());
  CounterRng a2(1, 2, 3, 4);
  CHECK(a2.next() != c.next());
  CounterRng r(42, 0);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    sum += u;
    CHECK(r.below(7) < 7u);
  }
  CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
  double sq = 0.0, m = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double z = r.standard_normal();
    m += z;
    sq += z * z;
  }
  CHECK(std::abs(m / 20000) < 0.05);
  CHECK(sq / 20000 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("generate_project places buggy components into the rank bands") {
  SimulationScenario s;
  auto project = generate_project(s, 7);
  REQUIRE(project.scores.size() == 300);
  REQUIRE(project.buggy.size() == 50);
  int top = 0, mid = 0, tail = 0;
  std::set<std::string> ids;
  for (const auto& bug : project.buggy) {
    ids.insert(bug.component_id);
    if (bug.rank <= 30) ++top;
    else if (bug.rank <= 150) ++mid;
    else ++tail;
    CHECK((bug.p_max >= 0.0 && bug.p_max <= 1.0));
    CHECK(bug.tau > 0.0);
  }
  CHECK(top == 26);
  CHECK(mid == 18);
  CHECK(tail == 6);
  CHECK(ids.size() == 50);
  for (std::size_t i = 1; i < project.buggy.size(); ++i)
    CHECK(project.buggy[i - 1].rank < project.buggy[i].rank);

  // Ranking the synthetic scores reproduces each buggy component's rank.
  auto ranked = assign_rank(project.scores);
  for (const auto& bug : project.buggy)
    CHECK(ranked[bug.rank - 1].score.component_id == bug.component_id);

  CHECK(generate_project(s, 7).buggy[3].tau == project.buggy[3].tau);
  CHECK(generate_project(s, 8).buggy[3].component_id != project.buggy[3].component_id);
}

TEST_CASE("overfull band is infeasible") {
  SimulationScenario s;
  s.predictor.top_decile_probability = 1.0;
  s.predictor.mid_band_probability = 0.0;
  try {
    generate_project(s, 1);
    FAIL("expected InfeasibleScenario");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleScenario);
  }
}

TEST_CASE("strategy plans conserve the budget") {
  SimulationScenario s;
  auto project = generate_project(s, 3);
  for (auto st : {Strategy::Equal, Strategy::SingleTierBads, Strategy::TwoTierBads}) {
    auto plan = plan_for_strategy(project, s, st);
    CHECK(plan.sum_allocated == doctest::Approx(300 * 15.0).epsilon(1e-9));
  }
  auto two = plan_for_strategy(project, s, Strategy::TwoTierBads);
  CHECK(two.entries.front().budget_seconds > 100.0);
  CHECK(two.entries.back().budget_seconds == doctest::Approx(450.0 / 150));
}

TEST_CASE("common random numbers make detection monotone in budget") {
  SimulationScenario s = small_scenario();
  auto project = generate_project(s, 5);
  auto plan = plan_for_strategy(project, s, Strategy::Equal);
  auto richer = plan;
  for (auto& e : richer.entries) e.budget_seconds *= 3.0;
  auto base = simulate_strategy(project, plan, 30, 5);
  auto more = simulate_strategy(project, richer, 30, 5);
  for (std::size_t r = 0; r < base.runs(); ++r)
    for (std::size_t j = 0; j < base.bugs(); ++j)
      if (base.detected(r, j)) CHECK(more.detected(r, j));

  auto truncated = plan;
  truncated.entries.pop_back();
  CHECK_THROWS_AS(simulate_strategy(project, truncated, 3, 5), Error);
  CHECK_THROWS_AS(simulate_strategy(project, plan, 0, 5), Error);
}

TEST_CASE("compare_strategies is deterministic per seed") {
  auto s = small_scenario();
  auto a = report_to_json(compare_strategies(s));
  auto b = report_to_json(compare_strategies(s));
  CHECK(a.dump() == b.dump());
  s.seed = 2;
  CHECK(report_to_json(compare_strategies(s)).dump() != a.dump());
}

TEST_CASE("comparison report structure") {
  auto s = small_scenario();
  auto report = compare_strategies(s);
  REQUIRE(report.strategies.size() == 3);
  REQUIRE(report.comparisons.size() == 3);
  CHECK(report.comparisons[2].first == 1);
  CHECK(report.comparisons[2].second == 2);
  CHECK(report.bands.size() == 10);
  int banded = 0;
  for (const auto& b : report.bands) banded += b.n_buggy;
  CHECK(banded == 10);
  CHECK((report.predictor_recall >= 0.0 && report.predictor_recall <= 1.0));
  for (const auto& st : report.strategies) {
    CHECK(st.bugs_found.size() == 5);
    CHECK(st.success_rates.size() == 10);
  }

  std::ostringstream csv;
  write_report_csv(csv, report);
  CHECK(csv.str().rfind("strategy,run,bugs_found\n", 0) == 0);
  auto only = compare_strategies(s, {Strategy::TwoTierBads});
  CHECK(only.comparisons.empty());
}

TEST_CASE("bigger budgets find at least as many bugs") {
  auto s = small_scenario();
  auto lo = compare_strategies(s, {Strategy::TwoTierBads});
  s.budget_per_class = 60.0;
  auto hi = compare_strategies(s, {Strategy::TwoTierBads});
  CHECK(hi.strategies[0].mean_bugs_found >= lo.strategies[0].mean_bugs_found);
}

TEST_CASE("scenario JSON round trip and validation") {
  SimulationScenario s;
  s.seed = 99;
  s.single_tier_t_min = 2.0;
  s.strategies = {Strategy::TwoTierBads, Strategy::Equal};
  auto back = scenario_from_json(scenario_to_json(s));
  CHECK(scenario_to_json(back) == scenario_to_json(s));
  CHECK(back.seed == 99);
  CHECK(back.strategies.size() == 2);

  CHECK(scenario_from_json(nlohmann::json::object()).n_components == 300);
  CHECK_THROWS_AS(scenario_from_json({{"bogus", 1}}), Error);
  CHECK_THROWS_AS(scenario_from_json({{"n_buggy", 0}}), Error);
  CHECK_THROWS_AS(scenario_from_json({{"strategies", {"random"}}}), Error);
  CHECK_THROWS_AS(scenario_from_json({{"detection", {{"tau", -1}}}}), Error);
  CHECK(strategy_from_string("two-tier-bads") == Strategy::TwoTierBads);
  CHECK(std::string(to_string(Strategy::SingleTierBads)) == "single-tier-bads");
}
