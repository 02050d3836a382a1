#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cocache/catalog.hpp"
#include "cocache/sim.hpp"

namespace cocache {

/// Three popularity regimes of six slots each, half shared and half local
/// demand, 20000 requests per slot and sBS.
SyntheticConfig regime_switching_demand();

/// Parameters for a generated workload.
struct SyntheticSpec {
  std::size_t n_files = 800;
  std::size_t n_slots = 200;
  double size_min = 10.0;
  double size_max = 100.0;
  SyntheticConfig demand = regime_switching_demand();
};

/// Everything a `run` needs. Serialized as JSON; see README for the schema.
struct RunConfig {
  std::optional<std::filesystem::path> catalog_path;  // with trace_path, replaces the generator
  std::optional<std::filesystem::path> trace_path;
  SyntheticSpec synthetic;
  std::string topology = "pentagon";  // pentagon | line:N | ring:N | complete:N | isolated:N | edges:N:a-b,c-d
  std::vector<PolicyKind> policies = all_policies();
  Vec cache_fracs{0.1, 0.2, 0.3, 0.4, 0.5};
  Vec lambda_sweep;
  double fraction_cap = 1.0;
  SimConfig sim;
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  int threads = 0;  // 0 keeps the OpenMP default

  void validate() const;
};

Topology parse_topology(const std::string& spec);

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys and bad values raise
/// ValidationError naming the field.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);

std::vector<PolicyKind> parse_policy_list(const std::string& list);
Vec parse_number_list(const std::string& list, const std::string& field);

}  // namespace cocache
