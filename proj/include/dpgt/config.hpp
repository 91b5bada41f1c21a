#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "dpgt/budget_allocator.hpp"
#include "dpgt/defect_predictor.hpp"
#include "dpgt/history_miner.hpp"
#include "dpgt/orchestrator.hpp"

namespace dpgt {

struct TierSettings {
  bool enabled = true;
  double split_fraction = 0.5;
  double tier1_budget_fraction = 0.9;
  /// Unset floors follow the per-class budget b: (b, b/5).
  std::optional<double> t_min_tier1;
  std::optional<double> t_min_tier2;

  TierParams resolve(double per_class_budget) const;
};

struct ToolConfig {
  MiningConfig mining;
  SchwaParams schwa;
  BadsParams bads;  // total_budget comes from the command line
  TierSettings tiers;
  GeneratorSpec generator;
  std::filesystem::path output_root = "out";

  /// Nested invariants; the generator is checked only once a template is set.
  void validate() const;
};

/// JSON document -> config. Absent keys keep defaults; unknown keys and type
/// mismatches raise Error(InvalidConfig).
ToolConfig config_from_json(const nlohmann::json& doc);
ToolConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ToolConfig& config);

}  // namespace dpgt
