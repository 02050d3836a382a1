#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "cocache/catalog.hpp"

namespace cocache {

/// Per-file cached fractions. Feasible when every entry lies in
/// [0, fraction_cap] and the cached length stays within the budget.
struct CachingStrategy {
  Vec fractions;

  CachingStrategy() = default;
  explicit CachingStrategy(Vec f) : fractions(std::move(f)) {}
  static CachingStrategy zeros(std::size_t n) { return CachingStrategy(Vec(n, 0.0)); }
  static CachingStrategy filled(std::size_t n, double value) { return CachingStrategy(Vec(n, value)); }

  std::size_t size() const { return fractions.size(); }
  double operator[](std::size_t f) const { return fractions[f]; }
  double& operator[](std::size_t f) { return fractions[f]; }
  std::span<const double> view() const { return fractions; }

  bool operator==(const CachingStrategy&) const = default;
};

// Relative slack on the budget constraint.
inline constexpr double kBudgetSlack = 1e-9;

double cached_length(std::span<const double> pi, const Catalog& catalog);
bool is_feasible(const CachingStrategy& pi, const Catalog& catalog);

/// sum_f d_f * pi_f * L_f.
double hit_rate(std::span<const double> pi, std::span<const double> d, const Catalog& catalog);
inline double hit_rate(const CachingStrategy& pi, std::span<const double> d, const Catalog& catalog) {
  return hit_rate(pi.view(), d, catalog);
}

/// Maximizes sum_f score_f * pi_f * L_f over the feasible set. Files are
/// filled whole in order of descending score (ties: lower index first) and
/// the boundary file receives the residual budget. With `positive_only`,
/// files with score <= 0 are left empty.
CachingStrategy fractional_knapsack(std::span<const double> score, const Catalog& catalog,
                                    bool positive_only);

/// Exact optimum of the linear hit rate for demand d.
CachingStrategy per_slot_optimal(std::span<const double> d, const Catalog& catalog);

/// Uniform placement C / sum(L) per file, capped.
CachingStrategy uniform_strategy(const Catalog& catalog);

enum class ProjectionMode { always_scale, only_if_exceeded };

struct Projection {
  CachingStrategy strategy;
  // Set when always_scale met an all-zero input and returned the zero strategy.
  bool degenerate = false;
};

/// Clips negatives, rescales onto the budget (always, or only when violated),
/// clips at the fraction cap and hands the freed budget to the remaining
/// fractional entries, largest first.
Projection project_budget(std::span<const double> raw, const Catalog& catalog,
                          ProjectionMode mode = ProjectionMode::only_if_exceeded);

/// Convex combination. Weights must be non-negative and sum to one within 1e-9.
CachingStrategy blend(std::span<const CachingStrategy> strategies, std::span<const double> weights);

// Checkpoint format: header `file,fraction`, shortest round-trip decimal.
void save_strategy(const CachingStrategy& pi, const std::filesystem::path& path);
CachingStrategy load_strategy(const std::filesystem::path& path);

}  // namespace cocache
