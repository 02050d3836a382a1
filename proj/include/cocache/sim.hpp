#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cocache/catalog.hpp"
#include "cocache/exchange.hpp"
#include "cocache/federated.hpp"
#include "cocache/lrfu.hpp"
#include "cocache/parallel.hpp"
#include "cocache/regret.hpp"
#include "cocache/strategy.hpp"
#include "cocache/weights.hpp"

namespace cocache {

enum class PolicyKind {
  proposed,                   // optimized alpha and w
  uniform_w_optimal_alpha,
  uniform_alpha_optimal_w,
  zero_w_optimal_alpha,       // w_self = 1
  lrfu,
  federated,
  uniform_static,             // C / sum(L) everywhere, never updated
  uniform_weights,            // uniform alpha and uniform w
};

const std::vector<PolicyKind>& all_policies();
std::string policy_name(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);
bool uses_subroutine(PolicyKind kind);

struct SimConfig {
  std::size_t tau = 10;
  std::size_t tau1 = 5;
  std::size_t tau2 = 5;
  OptimizerConfig optimizer;
  RegretMode regret_mode = RegretMode::per_slot_opt;
  LrfuConfig lrfu;                   // window length is taken from tau
  FederatedConfig federated;        // likewise
  DemandScale federated_scale = DemandScale::raw;
  double delta = 0.05;
  std::size_t refresh_every = 1;     // subroutine period in slots
  Execution exec = Execution::parallel;

  void validate() const;
  // Optimizer settings for the given variant.
  OptimizerConfig optimizer_for(PolicyKind kind) const;
};

struct MetricsRow {
  std::size_t slot = 0;
  std::size_t sbs = 0;
  PolicyKind policy = PolicyKind::proposed;
  double cache_frac = 0.0;
  double hit = 0.0;
  double cum_hit = 0.0;
  double regret_over_tau = 0.0;
  double disc_hat = 0.0;
  double mismatch_hat = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  std::size_t iters = 0;

  bool operator==(const MetricsRow&) const = default;
};

struct MetricsLog {
  std::vector<MetricsRow> rows;  // ordered by (slot, sbs)
  std::size_t n_sbs = 0;

  double cumulative_hit(std::size_t b) const;
  double cumulative_hit() const;  // summed over sBSs
  bool operator==(const MetricsLog&) const = default;
};

void write_metrics_csv(const std::vector<const MetricsLog*>& logs, const std::filesystem::path& path);

/// Scores every slot with the strategy installed at the end of the previous
/// slot and then computes the strategy for the next one. `cache_frac` is only
/// recorded in the log.
MetricsLog run_simulation(const DemandTrace& trace, const Catalog& catalog, const Topology& topology,
                          PolicyKind policy, const SimConfig& cfg, double cache_frac = 0.0);

struct ComparisonRow {
  PolicyKind policy = PolicyKind::proposed;
  double cache_frac = 0.0;
  std::optional<std::size_t> sbs;  // empty for the summed row
  double cum_hit = 0.0;
  double avg_hit = 0.0;
  double log_ratio = 0.0;  // log(reference / this); reference is proposed when present
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::vector<MetricsLog> logs;  // one per (cache_frac, policy), same order as the loops
  PolicyKind reference = PolicyKind::proposed;
};

/// Runs every policy at every cache fraction (C = frac * sum(L)) on the same
/// trace. Independent runs are spread over threads.
Comparison compare_policies(const DemandTrace& trace, const Vec& sizes, const Topology& topology,
                            const std::vector<PolicyKind>& policies, const Vec& cache_fracs, const SimConfig& cfg,
                            double fraction_cap = 1.0);

void write_comparison_csv(const Comparison& cmp, const std::filesystem::path& path);

struct LambdaSweepRow {
  double cache_frac = 0.0;
  double lambda = 0.0;
  double cum_hit = 0.0;  // summed over sBSs
  double avg_hit = 0.0;
};

std::vector<LambdaSweepRow> lambda_sweep(const DemandTrace& trace, const Vec& sizes, const Topology& topology,
                                         const Vec& lambdas, const Vec& cache_fracs, const SimConfig& cfg,
                                         double fraction_cap = 1.0);

void write_lambda_csv(const std::vector<LambdaSweepRow>& rows, const std::filesystem::path& path);

}  // namespace cocache
