#include "dpgt/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>

#include "dpgt/error.hpp"

namespace dpgt {

namespace {

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::InvalidConfig, where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; }))
      throw Error(ErrorCode::InvalidConfig,
                  "unknown configuration key '" + (where.empty() ? key : where + "." + key) + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

}  // namespace

TierParams TierSettings::resolve(double per_class_budget) const {
  TierParams p = TierParams::for_per_class_budget(per_class_budget);
  p.split_fraction = split_fraction;
  p.tier1_budget_fraction = tier1_budget_fraction;
  if (t_min_tier1) p.t_min_tier1 = *t_min_tier1;
  if (t_min_tier2) p.t_min_tier2 = *t_min_tier2;
  return p;
}

void ToolConfig::validate() const {
  mining.validate();
  schwa.validate();
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (!(bads.t_min >= 0.0)) fail("bads.t_min must be >= 0");
  if (!(bads.t_dp >= 0.0)) fail("bads.t_dp must be >= 0");
  if (!std::isfinite(bads.e_a) || !std::isfinite(bads.e_b) || !std::isfinite(bads.e_c))
    fail("bads exponential parameters must be finite");
  tiers.resolve(1.0).validate();
  if (!generator.command_template.empty()) generator.validate();
  if (output_root.empty()) fail("output_root must not be empty");
}

ToolConfig config_from_json(const json& doc) {
  ToolConfig c;
  try {
    require_keys(doc, {"mining", "schwa", "bads", "tiers", "generator", "output_root"}, "");
    if (doc.contains("mining")) {
      const auto& m = doc["mining"];
      require_keys(m, {"window_n", "fix_pattern", "include_extensions", "follow_renames",
                       "fixes_count_as_revisions"},
                   "mining");
      read(m, "window_n", c.mining.window_n);
      read(m, "fix_pattern", c.mining.fix_pattern);
      read(m, "include_extensions", c.mining.include_extensions);
      read(m, "follow_renames", c.mining.follow_renames);
      read(m, "fixes_count_as_revisions", c.mining.fixes_count_as_revisions);
    }
    if (doc.contains("schwa")) {
      const auto& s = doc["schwa"];
      require_keys(s, {"w_r", "w_f", "w_a", "time_range"}, "schwa");
      read(s, "w_r", c.schwa.w_r);
      read(s, "w_f", c.schwa.w_f);
      read(s, "w_a", c.schwa.w_a);
      read(s, "time_range", c.schwa.time_range);
    }
    if (doc.contains("bads")) {
      const auto& b = doc["bads"];
      require_keys(b, {"e_a", "e_b", "e_c", "t_min", "t_dp"}, "bads");
      read(b, "e_a", c.bads.e_a);
      read(b, "e_b", c.bads.e_b);
      read(b, "e_c", c.bads.e_c);
      read(b, "t_min", c.bads.t_min);
      read(b, "t_dp", c.bads.t_dp);
    }
    if (doc.contains("tiers")) {
      const auto& t = doc["tiers"];
      require_keys(t, {"enabled", "split_fraction", "tier1_budget_fraction", "t_min_tier1",
                       "t_min_tier2", "tier2_mode"},
                   "tiers");
      read(t, "enabled", c.tiers.enabled);
      read(t, "split_fraction", c.tiers.split_fraction);
      read(t, "tier1_budget_fraction", c.tiers.tier1_budget_fraction);
      read(t, "t_min_tier1", c.tiers.t_min_tier1);
      read(t, "t_min_tier2", c.tiers.t_min_tier2);
      if (t.contains("tier2_mode") && t["tier2_mode"].get<std::string>() != "uniform")
        throw Error(ErrorCode::InvalidConfig, "tiers.tier2_mode must be \"uniform\"");
    }
    if (doc.contains("generator")) {
      const auto& g = doc["generator"];
      require_keys(g, {"command_template", "grace_seconds", "workdir", "env_overrides"},
                   "generator");
      read(g, "command_template", c.generator.command_template);
      read(g, "grace_seconds", c.generator.grace_seconds);
      if (g.contains("workdir")) c.generator.workdir = g["workdir"].get<std::string>();
      read(g, "env_overrides", c.generator.env_overrides);
    }
    if (doc.contains("output_root")) c.output_root = doc["output_root"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("configuration: ") + e.what());
  }
  c.generator.output_root = c.output_root;
  c.validate();
  return c;
}

ToolConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open configuration " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig,
                "configuration " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

json config_to_json(const ToolConfig& c) {
  json tiers = {{"enabled", c.tiers.enabled},
                {"split_fraction", c.tiers.split_fraction},
                {"tier1_budget_fraction", c.tiers.tier1_budget_fraction},
                {"tier2_mode", "uniform"}};
  tiers["t_min_tier1"] = c.tiers.t_min_tier1 ? json(*c.tiers.t_min_tier1) : json(nullptr);
  tiers["t_min_tier2"] = c.tiers.t_min_tier2 ? json(*c.tiers.t_min_tier2) : json(nullptr);
  return {{"mining",
           {{"window_n", c.mining.window_n},
            {"fix_pattern", c.mining.fix_pattern},
            {"include_extensions", c.mining.include_extensions},
            {"follow_renames", c.mining.follow_renames},
            {"fixes_count_as_revisions", c.mining.fixes_count_as_revisions}}},
          {"schwa",
           {{"w_r", c.schwa.w_r},
            {"w_f", c.schwa.w_f},
            {"w_a", c.schwa.w_a},
            {"time_range", c.schwa.time_range}}},
          {"bads",
           {{"e_a", c.bads.e_a},
            {"e_b", c.bads.e_b},
            {"e_c", c.bads.e_c},
            {"t_min", c.bads.t_min},
            {"t_dp", c.bads.t_dp}}},
          {"tiers", tiers},
          {"generator",
           {{"command_template", c.generator.command_template},
            {"grace_seconds", c.generator.grace_seconds},
            {"workdir", c.generator.workdir.string()},
            {"env_overrides", c.generator.env_overrides}}},
          {"output_root", c.output_root.string()}};
}

}  // namespace dpgt
