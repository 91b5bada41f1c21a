#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dpgt/defect_predictor.hpp"
#include "dpgt/error.hpp"
#include "support/oracles.hpp"

using namespace dpgt;

TEST_CASE("twr matches the logistic formula") {
  for (double t : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0})
    for (double tr : {0.0, 0.4, 1.0})
      CHECK(twr(t, tr) == doctest::Approx(static_cast<double>(oracle::twr(t, tr))).epsilon(1e-12));
  CHECK(twr(1.0, 0.4) == doctest::Approx(0.982014).epsilon(1e-6));
  CHECK(twr(0.5, 0.4) == doctest::Approx(0.119203).epsilon(1e-6));
  CHECK(twr(0.0, 0.4) == doctest::Approx(3.3535e-4).epsilon(1e-4));
}

TEST_CASE("twr is strictly increasing in t") {
  double prev = twr(0.0, 0.4);
  for (int i = 1; i <= 1000; ++i) {
    double cur = twr(i / 1000.0, 0.4);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("defect probability") {
  CHECK(defect_probability(0.0) == 0.0);
  CHECK(defect_probability(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(defect_probability(1.1) == doctest::Approx(0.667129).epsilon(1e-6));
  double prev = 0.0;
  for (int i = 1; i <= 200; ++i) {
    double p = defect_probability(i * 0.05);
    CHECK(p > prev);
    CHECK(p < 1.0);
    prev = p;
  }
}

TEST_CASE("normalize_timestamp") {
  TimeNormalization n{100, 300};
  CHECK(normalize_timestamp(100, n) == 0.0);
  CHECK(normalize_timestamp(200, n) == 0.5);
  CHECK(normalize_timestamp(300, n) == 1.0);
  CHECK(normalize_timestamp(50, TimeNormalization{50, 50}) == 1.0);
  CHECK_THROWS_AS(normalize_timestamp(99, n), Error);
  try {
    normalize_timestamp(301, n);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TimestampOutOfRange);
  }
}

TEST_CASE("normalization window") {
  HistoryMap h;
  h["a"] = {"a", {5, 9}, {}, {5}};
  h["b"] = {"b", {2}, {2}, {2}};
  h["c"] = {"c", {}, {}, {}};
  auto n = normalization_for(h);
  CHECK(n.t_oldest == 2);
  CHECK(n.t_latest == 9);
}

TEST_CASE("score_component sums each series with the weights") {
  ComponentHistory h{"X.java", {0, 50, 100}, {100}, {0}};
  TimeNormalization n{0, 100};
  SchwaParams p;
  auto s = score_component(h, p, n);
  long double r = oracle::twr(0, .4) + oracle::twr(.5, .4) + oracle::twr(1, .4);
  long double f = oracle::twr(1, .4);
  long double a = oracle::twr(0, .4);
  long double score = 0.25L * r + 0.5L * f + 0.25L * a;
  CHECK(s.twr_sums.revisions == doctest::Approx(static_cast<double>(r)).epsilon(1e-12));
  CHECK(s.score == doctest::Approx(static_cast<double>(score)).epsilon(1e-12));
  CHECK(s.probability ==
        doctest::Approx(static_cast<double>(1 - std::exp(-score))).epsilon(1e-12));

  ComponentHistory empty{"E.java", {}, {}, {}};
  CHECK(score_component(empty, p, n).probability == 0.0);
}

TEST_CASE("more recent activity never lowers the probability") {
  std::mt19937 rng(7);
  SchwaParams p;
  TimeNormalization n{0, 1000};
  for (int trial = 0; trial < 200; ++trial) {
    ComponentHistory h{"x", {}, {}, {}};
    std::uniform_int_distribution<int> ts(0, 999);
    for (int i = 0; i < 5; ++i) h.revisions.push_back(ts(rng));
    double base = score_component(h, p, n).probability;
    auto more = h;
    more.revisions.push_back(ts(rng));
    CHECK(score_component(more, p, n).probability >= base);
    auto later = h;
    for (auto& t : later.revisions) t = std::min<EpochSeconds>(t + 1, 1000);
    CHECK(score_component(later, p, n).probability >= base);
  }
}

TEST_CASE("predict_project orders by probability then id") {
  HistoryMap h;
  h["b.java"] = {"b.java", {10}, {}, {10}};
  h["a.java"] = {"a.java", {10}, {}, {10}};
  h["old.java"] = {"old.java", {0}, {}, {0}};
  h["hot.java"] = {"hot.java", {5, 10}, {10}, {5, 10}};
  auto pred = predict_project(h, SchwaParams{});
  REQUIRE(pred.scores.size() == 4);
  CHECK(pred.scores[0].component_id == "hot.java");
  CHECK(pred.scores[1].component_id == "a.java");
  CHECK(pred.scores[2].component_id == "b.java");
  CHECK(pred.scores[3].component_id == "old.java");
  CHECK(pred.elapsed_seconds >= 0.0);

  CHECK_THROWS_AS(predict_project(HistoryMap{}, SchwaParams{}), Error);
  SchwaParams bad;
  bad.w_r = 0.5;
  CHECK_THROWS_AS(predict_project(h, bad), Error);
}

TEST_CASE("SchwaParams validation") {
  SchwaParams p;
  CHECK_NOTHROW(p.validate());
  p.time_range = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.w_f = -0.1;
  p.w_r = 0.85;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("round_up_seconds") {
  CHECK(round_up_seconds(0.0) == 0.0);
  CHECK(round_up_seconds(0.2) == 1.0);
  CHECK(round_up_seconds(3.0) == 3.0);
}

TEST_CASE("scores CSV round trip and validation") {
  std::vector<DefectScore> scores{score_from_sums("src/a,b.java", {1.5, 0.25, 1}, SchwaParams{}),
                                  score_from_sums("Z.java", {0, 0, 0}, SchwaParams{})};
  std::ostringstream out;
  write_scores_csv(out, scores);
  CHECK(out.str().rfind("component,score,probability,twr_revisions,twr_fixes,twr_authors\n", 0) ==
        0);
  std::istringstream in(out.str());
  auto back = read_scores_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].component_id == "src/a,b.java");
  CHECK(back[0].score == doctest::Approx(scores[0].score).epsilon(1e-9));
  CHECK(back[0].probability == doctest::Approx(scores[0].probability).epsilon(1e-6));
  CHECK(back[1].probability == 0.0);

  std::istringstream bad_header("x,y\n");
  CHECK_THROWS_AS(read_scores_csv(bad_header), Error);
  std::istringstream bad_prob(
      "component,score,probability,twr_revisions,twr_fixes,twr_authors\nA,1,1.5,0,0,0\n");
  CHECK_THROWS_AS(read_scores_csv(bad_prob), Error);
  std::istringstream short_row(
      "component,score,probability,twr_revisions,twr_fixes,twr_authors\nA,1\n");
  CHECK_THROWS_AS(read_scores_csv(short_row), Error);
}
