#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "joss/baselines.hpp"
#include "joss/classify.hpp"
#include "joss/cluster.hpp"
#include "joss/engine.hpp"
#include "joss/workload.hpp"

namespace joss {

struct ScenarioSeeds {
  std::uint64_t placement = 0;
  std::uint64_t workload = 0;
  std::uint64_t fp = 0;      // defaults to the workload seed
  std::uint64_t engine = 0;  // defaults to the placement seed
};

enum class RegistryMode : std::uint8_t { warm, cold, file };

struct ScenarioConfig {
  std::string name;
  std::filesystem::path base_dir;  // relative paths resolve here
  TopologySpec topology;
  std::uint32_t replication = 1;
  CostModel cost;
  ProfileTable profiles = ProfileTable::defaults();
  WorkloadConfig workload;
  std::optional<std::filesystem::path> trace_path;  // replaces the generated workload
  RegistryMode registry = RegistryMode::warm;
  std::filesystem::path registry_path;
  std::vector<SchedulerKind> schedulers = all_scheduler_kinds();
  CapacityConfig capacity = CapacityConfig::defaults();
  ScenarioSeeds seeds;
};

// "128MiB", "1GiB", "512KiB", "4096" (bytes). Fractions allowed: "0.5GiB".
Bytes parse_size(std::string_view text);

// Parses a YAML scenario document. Errors name the offending field path,
// e.g. "workload.jobs[2].count: expected a positive integer".
ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);

// Comma separated scheduler names.
std::vector<SchedulerKind> parse_scheduler_list(std::string_view text);

// Registry as configured: profile means (warm), empty (cold) or loaded.
FpRegistry initial_registry(const ScenarioConfig& config);

RunOptions run_options(const ScenarioConfig& config);

}  // namespace joss
