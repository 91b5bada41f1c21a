#include <doctest.h>

#include <fstream>

#include "dpgt/config.hpp"
#include "dpgt/error.hpp"
#include "support/git_fixture.hpp"

using namespace dpgt;
using nlohmann::json;

namespace {

ErrorCode code_of(const json& doc) {
  try {
    config_from_json(doc);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected dpgt::Error");
  return ErrorCode::InvalidInput;
}

}  // namespace

TEST_CASE("defaults") {
  auto c = config_from_json(json::object());
  CHECK(c.mining.window_n == 500);
  CHECK(c.schwa.w_f == 0.5);
  CHECK(c.schwa.time_range == 0.4);
  CHECK(c.bads.e_c == -10.47408);
  CHECK(c.tiers.enabled);
  CHECK(c.output_root == "out");
  auto t = c.tiers.resolve(30.0);
  CHECK(t.t_min_tier1 == 30.0);
  CHECK(t.t_min_tier2 == 6.0);
}

TEST_CASE("overrides are applied") {
  json doc = {{"mining", {{"window_n", 50}, {"include_extensions", {".kt", ".java"}}}},
              {"schwa", {{"w_r", 0.5}, {"w_f", 0.25}, {"w_a", 0.25}}},
              {"bads", {{"t_min", 2.0}}},
              {"tiers", {{"split_fraction", 0.3}, {"t_min_tier1", 20}, {"tier2_mode", "uniform"}}},
              {"generator",
               {{"command_template", "gen {component} {budget_seconds}"},
                {"grace_seconds", 2.5},
                {"env_overrides", {{"A", "1"}}}}},
              {"output_root", "results"}};
  auto c = config_from_json(doc);
  CHECK(c.mining.window_n == 50);
  CHECK(c.mining.include_extensions.size() == 2);
  CHECK(c.schwa.w_r == 0.5);
  CHECK(c.bads.t_min == 2.0);
  auto t = c.tiers.resolve(15.0);
  CHECK(t.split_fraction == 0.3);
  CHECK(t.t_min_tier1 == 20.0);
  CHECK(t.t_min_tier2 == 3.0);
  CHECK(c.generator.grace_seconds == 2.5);
  CHECK(c.generator.env_overrides.at("A") == "1");
  CHECK(c.generator.output_root == "results");
  CHECK(config_from_json(config_to_json(c)).mining.window_n == 50);
  CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));
}

TEST_CASE("invalid configurations") {
  CHECK(code_of({{"colour", 1}}) == ErrorCode::InvalidConfig);
  CHECK(code_of({{"mining", {{"windw_n", 1}}}}) == ErrorCode::InvalidConfig);
  CHECK(code_of({{"mining", {{"window_n", "many"}}}}) == ErrorCode::InvalidConfig);
  CHECK(code_of({{"mining", {{"window_n", 0}}}}) == ErrorCode::InvalidConfig);
  CHECK(code_of({{"schwa", {{"w_r", 0.9}}}}) == ErrorCode::InvalidConfig);
  CHECK(code_of({{"tiers", {{"split_fraction", 1.0}}}}) == ErrorCode::InvalidConfig);
  CHECK(code_of({{"tiers", {{"tier2_mode", "exponential"}}}}) == ErrorCode::InvalidConfig);
  CHECK(code_of({{"generator", {{"command_template", "gen {component}"}}}}) ==
        ErrorCode::InvalidConfig);
  CHECK(code_of({{"bads", {{"t_dp", -1}}}}) == ErrorCode::InvalidConfig);
  CHECK(code_of(json::array()) == ErrorCode::InvalidConfig);
}

TEST_CASE("load_config from disk") {
  fixture::TempDir dir("config");
  auto path = dir.path() / "c.json";
  std::ofstream(path) << R"({"schwa": {"time_range": 0.7}})";
  CHECK(load_config(path).schwa.time_range == 0.7);
  std::ofstream(dir.path() / "bad.json") << "{not json";
  CHECK_THROWS_AS(load_config(dir.path() / "bad.json"), Error);
  CHECK_THROWS_AS(load_config(dir.path() / "missing.json"), Error);
}
